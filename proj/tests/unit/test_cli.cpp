#include <gtest/gtest.h>

#include <filesystem>
#include <map>
#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "drro/controller_io.hpp"
#include "test_util.hpp"

using drro::testing::data_path;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  args.insert(args.begin(), "drro");
  std::ostringstream out, err;
  const int code = drro::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path fresh(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drro_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) { return drro::read_file(p); }

}  // namespace

TEST(Cli, SynthToyPlant) {
  const fs::path out = fresh("synth");
  const CliRun r = run({"synth", "--plant", data_path("toy_plant.json"), "--radius", "1", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* f : {"controller.json", "synth_diagnostics.json", "impulse_response.csv",
                        "controller_samples.csv"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  const auto diag = nlohmann::json::parse(slurp(out / "synth_diagnostics.json"));
  EXPECT_LE(diag["synthesis"]["kkt_residual"].get<double>(), 1e-6);
  EXPECT_GT(diag["gamma_star"].get<double>(), diag["gamma_ro_estimate"].get<double>());
}

TEST(Cli, ConfigErrors) {
  const fs::path out = fresh("err");
  CliRun r = run({"synth", "--plant", "/no/such/plant.json", "--radius", "1", "--out", out.string()});
  EXPECT_EQ(r.code, 2);
  const auto rec = nlohmann::json::parse(r.err);
  EXPECT_EQ(rec["error"], "ParseError");
  EXPECT_TRUE(fs::exists(out / "error.json"));
  EXPECT_EQ(run({"synth", "--plant", data_path("toy_plant.json"), "--radius", "0", "--out", out.string()}).code, 2);
  EXPECT_EQ(run({"sweep", "--plant", data_path("toy_plant.json"), "--out", out.string()}).code, 2);
  EXPECT_EQ(run({"synth", "--plant", data_path("toy_plant.json"), "--grid-k", "30", "--radius", "1", "--out", out.string()}).code, 2);
  EXPECT_EQ(run({"frobnicate"}).code, 2);
  EXPECT_EQ(run({"synth", "--radius", "1"}).code, 2);
}

TEST(Cli, InfeasibleGammaExitCode) {
  const fs::path out = fresh("infeasible");
  const CliRun r = run({"synth", "--plant", data_path("two_state_plant.json"), "--gamma", "1e-4", "--out", out.string()});
  EXPECT_EQ(r.code, 4) << r.err;
}

TEST(Cli, EvalSmallRadiusDrMatchesH2) {
  const fs::path out = fresh("eval");
  const CliRun r = run({"eval", "--plant", data_path("toy_plant.json"), "--radius", "1e-3", "--out", out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream is(slurp(out / "eval_report.csv"));
  std::string line;
  std::getline(is, line);
  std::map<std::string, double> worst;
  while (std::getline(is, line)) {
    std::vector<std::string> cols;
    std::stringstream ls(line);
    for (std::string c; std::getline(ls, c, ',');) cols.push_back(c);
    worst[cols[0]] = std::stod(cols[3]);
  }
  ASSERT_EQ(worst.size(), 3u);
  EXPECT_LE(std::abs(worst["DR"] - worst["H2"]) / worst["H2"], 0.01);
  EXPECT_LE(worst["DR"], worst["RO"]);
  EXPECT_TRUE(fs::exists(out / "profile.csv"));
  EXPECT_TRUE(fs::exists(out / "eval_cross.csv"));
}

TEST(Cli, SweepDeterministicAndDeduplicated) {
  const fs::path a = fresh("sweep_a"), b = fresh("sweep_b");
  const std::vector<std::string> base{"sweep", "--plant", data_path("toy_plant.json"), "--radius", "0.05",
                                      "--radius", "1", "--radius", "10", "--radius", "1"};
  auto with_out = [&](const fs::path& o, const std::string& jobs) {
    auto v = base;
    v.insert(v.end(), {"--out", o.string(), "--jobs", jobs});
    return v;
  };
  const CliRun ra = run(with_out(a, "1"));
  ASSERT_EQ(ra.code, 0) << ra.err;
  EXPECT_NE(ra.err.find("duplicate radius"), std::string::npos);
  const CliRun rb = run(with_out(b, "3"));
  ASSERT_EQ(rb.code, 0) << rb.err;
  const std::string csv = slurp(a / "sweep.csv");
  EXPECT_EQ(csv, slurp(b / "sweep.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 9);
  EXPECT_EQ(csv.find("false"), std::string::npos);
}

TEST(Cli, CacheInvalidatedByPlantChange) {
  const fs::path out = fresh("cache");
  const fs::path plant = out / "plant.json";
  fs::create_directories(out);
  drro::write_file_atomic(plant, slurp(data_path("toy_plant.json")));
  ASSERT_EQ(run({"synth", "--plant", plant.string(), "--radius", "1", "--out", out.string()}).code, 0);
  auto caches = [&] {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(out / "cache")) ++n;
    return n;
  };
  EXPECT_EQ(caches(), 1u);
  // Re-running with the same plant reuses the cache; a changed plant gets its own.
  ASSERT_EQ(run({"eval", "--plant", plant.string(), "--radius", "1", "--out", out.string()}).code, 0);
  EXPECT_EQ(caches(), 1u);
  drro::write_file_atomic(plant, R"({"A": [[0.6]], "B_u": [[1.0]], "B_w": [[1.0]], "Q": [[1.0]], "R": [[1.0]]})");
  ASSERT_EQ(run({"eval", "--plant", plant.string(), "--radius", "1", "--out", out.string()}).code, 0);
  EXPECT_EQ(caches(), 2u);
}

TEST(Cli, ImportedControllerRow) {
  const fs::path out = fresh("import");
  fs::create_directories(out);
  drro::write_file_atomic(out / "hinf.json", R"({"A_c": [[0.2]], "B_c": [[1]], "C_c": [[-0.1]], "D_c": [[-0.4]]})");
  const CliRun r = run({"eval", "--plant", data_path("toy_plant.json"), "--radius", "1", "--out", out.string(),
                     "--import-controller", (out / "hinf.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(slurp(out / "eval_report.csv").find("hinf,"), std::string::npos);
}
