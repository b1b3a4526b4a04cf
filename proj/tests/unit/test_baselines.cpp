#include <gtest/gtest.h>

#include <filesystem>
#include <random>

#include "drro/baselines.hpp"
#include "drro/controller_io.hpp"
#include "drro/errors.hpp"
#include "test_util.hpp"

using namespace drro;
using drro::testing::scalar_plant;
using drro::testing::toy_ctx;
using drro::testing::two_state_ctx;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("drro_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const GammaRoEstimate& ro_est() {
  static const GammaRoEstimate e = estimate_gamma_ro(two_state_ctx());
  return e;
}

}  // namespace

TEST(H2, MemorylessPlant) {
  // A = 0: Delta = sqrt 2, U = -1/sqrt 2  =>  K_H2 = -1/2 = Kcirc.
  const PlantContext ctx = prepare_plant(scalar_plant(0.0, 1, 1), FrequencyGrid(8));
  const ControllerSamples k = h2_controller(ctx);
  for (std::size_t i = 0; i < ctx.grid.size(); ++i) EXPECT_LT(std::abs(k.K[i](0, 0) + 0.5), 1e-14);
  EXPECT_EQ(k.provenance, Provenance::kH2);
}

TEST(H2, MinimizesNominalRegret) {
  const PlantContext& ctx = two_state_ctx();
  const ControllerSamples h2 = h2_controller(ctx);
  const double base = regret_spectrum(h2, ctx).mean();
  std::mt19937 gen(17);
  std::normal_distribution<double> n(0.0, 0.2);
  for (int trial = 0; trial < 20; ++trial) {
    ControllerSamples k = h2;
    std::vector<double> taps(8);
    for (double& t : taps) t = n(gen);
    for (std::size_t i = 0; i < ctx.grid.size(); ++i) {
      for (std::size_t j = 0; j < taps.size(); ++j) k.K[i](0, 0) += taps[j] * std::pow(ctx.grid.z(i), -double(j));
    }
    EXPECT_GE(regret_spectrum(k, ctx).mean(), base - 1e-8);
  }
  const ControllerSamples ro = ro_limit_controller(ctx, ro_est().gamma_ro);
  EXPECT_GE(regret_spectrum(ro, ctx).mean(), base - 1e-8);
}

TEST(RoLimit, FlatRegretNearBound) {
  const PlantContext& ctx = two_state_ctx();
  const ControllerSamples ro = ro_limit_controller(ctx, ro_est().gamma_ro);
  EXPECT_EQ(ro.provenance, Provenance::kRO);
  const RegretSpectrum c = regret_spectrum(ro, ctx);
  EXPECT_LE(c.sup(), 1.05 * ro_est().gamma_ro);
  EXPECT_NEAR(c.sup(), ro_est().gamma_ro, 0.01 * ro_est().gamma_ro);
}

TEST(Import, StateSpaceDelay) {
  const fs::path dir = temp_dir("ss");
  const fs::path f = dir / "k.json";
  write_file_atomic(f, R"({"A_c": [[0]], "B_c": [[1]], "C_c": [[0.3]], "D_c": [[0]]})");
  const ImportedController k = import_controller(f, toy_ctx());
  for (std::size_t i = 0; i < toy_ctx().grid.size(); i += 5) {
    EXPECT_LT(std::abs(k.samples.K[i](0, 0) - 0.3 / toy_ctx().grid.z(i)), 1e-15);
  }
  EXPECT_EQ(k.samples.provenance, Provenance::kImported);
}

TEST(Import, StateSpaceUsesPhysicalInputUnits) {
  const PlantContext ctx = prepare_plant(scalar_plant(0.5, 1, 1, 1.0, 4.0), FrequencyGrid(8));
  const fs::path f = temp_dir("units") / "k.json";
  write_file_atomic(f, R"({"A_c": [], "B_c": [], "C_c": [], "D_c": [[-0.25]]})");
  const ImportedController k = import_controller(f, ctx);
  EXPECT_NEAR(k.samples.K[3](0, 0).real(), -0.5, 1e-15);
}

TEST(Import, CacheRoundTripIsBitExact) {
  const PlantContext& ctx = two_state_ctx();
  ControllerSamples ro = ro_limit_controller(ctx, ro_est().gamma_ro);
  ro.radius = 0.1;
  const fs::path f = temp_dir("cache") / "c.json";
  save_controller(f, ControllerCache{ctx.plant_hash, ro});
  const ImportedController back = import_controller(f, ctx);
  ASSERT_EQ(back.samples.K.size(), ro.K.size());
  for (std::size_t i = 0; i < ro.K.size(); ++i) {
    EXPECT_EQ(back.samples.K[i](0, 0).real(), ro.K[i](0, 0).real());
    EXPECT_EQ(back.samples.K[i](0, 0).imag(), ro.K[i](0, 0).imag());
  }
  EXPECT_EQ(back.samples.provenance, Provenance::kRO);
  EXPECT_EQ(*back.samples.gamma_used, *ro.gamma_used);
  EXPECT_EQ(*back.samples.radius, 0.1);
  // Different plant: stale cache is refused.
  EXPECT_THROW(import_controller(f, toy_ctx()), Error);
}

TEST(Import, NoncausalSamplesRejected) {
  const PlantContext& ctx = toy_ctx();
  GridSamples k(ctx.grid, 1, 1);
  for (std::size_t i = 0; i < k.size(); ++i) k[i](0, 0) = ctx.grid.z(i);  // one-step lookahead
  const fs::path f = temp_dir("leak") / "c.json";
  save_controller(f, ControllerCache{ctx.plant_hash, ControllerSamples{k, Provenance::kImported, {}, {}}});
  try {
    import_controller(f, ctx);
    ADD_FAILURE();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kCausalLeakExceeded);
  }
}

TEST(Import, ParseErrors) {
  const fs::path dir = temp_dir("bad");
  write_file_atomic(dir / "a.json", "{");
  write_file_atomic(dir / "b.json", R"({"A_c": [[0]], "B_c": [[1]], "C_c": [[1, 2]], "D_c": [[0]]})");
  EXPECT_THROW(import_controller(dir / "a.json", toy_ctx()), Error);
  EXPECT_THROW(import_controller(dir / "b.json", toy_ctx()), Error);
  EXPECT_THROW(import_controller(dir / "missing.json", toy_ctx()), Error);
}
