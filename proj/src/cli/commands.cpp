#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "drro/baselines.hpp"
#include "drro/controller_io.hpp"
#include "drro/errors.hpp"
#include "drro/gamma_search.hpp"
#include "drro/regret.hpp"

namespace drro::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string plant;
  int grid_k = FrequencyGrid::kDefaultExponent;
  std::vector<double> radii;
  std::optional<double> gamma;
  std::string out_dir;
  std::uint64_t seed = 1;
  int jobs = 1;
  double tol_fp = 1e-9;
  double tol_gamma = 1e-8;
  std::vector<std::string> imports;
  int mc_trials = 0;
  int mc_horizon = 200;
};

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string radius_tag(double r) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", r);
  return buf;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::kParseError:
    case ErrorKind::kDimensionMismatch:
    case ErrorKind::kNotStabilizable:
    case ErrorKind::kDisturbanceNotScalar:
    case ErrorKind::kGridMismatch:
    case ErrorKind::kCausalLeakExceeded:
    case ErrorKind::kInvalidArgument:
      return kExitConfig;
    case ErrorKind::kGammaInfeasible:
    case ErrorKind::kGammaBelowSpectrum:
      return kExitInfeasible;
    default:
      return kExitNumerical;
  }
}

void config_error(const std::string& msg) { fail(ErrorKind::kInvalidArgument, msg); }

void validate(const RunConfig& c) {
  if (c.grid_k < FrequencyGrid::kMinExponent || c.grid_k > FrequencyGrid::kMaxExponent) {
    config_error("--grid-k must be in [8, 20]");
  }
  for (double r : c.radii) {
    if (!(r > 0.0) || !std::isfinite(r)) config_error("radius must be positive, got " + fmt(r));
  }
  if (c.gamma && !(*c.gamma > 0.0)) config_error("--gamma must be positive");
  if (!(c.tol_fp > 0.0) || !(c.tol_gamma > 0.0)) config_error("tolerances must be positive");
  if (c.jobs < 1) config_error("--jobs must be >= 1");
  if (!fs::exists(c.plant)) fail(ErrorKind::kParseError, "plant file not found: " + c.plant);
  for (const auto& f : c.imports) {
    if (!fs::exists(f)) fail(ErrorKind::kParseError, "controller file not found: " + f);
  }
}

GammaSearchConfig search_config(const RunConfig& c) {
  GammaSearchConfig g;
  g.fp_tol = c.tol_fp;
  g.resid_tol = c.tol_gamma;
  return g;
}

// Per-run state shared by the commands.
struct Session {
  RunConfig cfg;
  PlantContext ctx;
  fs::path out;
  std::ostream& log;
  std::optional<double> gamma_ro;
  std::mutex mu;

  Session(RunConfig c, std::ostream& l)
      : cfg(std::move(c)),
        ctx(prepare_plant(load_plant(cfg.plant), FrequencyGrid(cfg.grid_k))),
        out(cfg.out_dir),
        log(l) {}

  double ro() {
    std::lock_guard lock(mu);
    if (!gamma_ro) gamma_ro = estimate_gamma_ro(ctx, search_config(cfg)).gamma_ro;
    return *gamma_ro;
  }

  fs::path cache_path(double r) const {
    return out / "cache" /
           ("dr_" + hash_to_hex(ctx.plant_hash) + "_k" + std::to_string(cfg.grid_k) + "_r" +
            radius_tag(r) + ".json");
  }

  // DR-RO controller at radius r, from the cache when its header matches.
  ControllerSamples dr_controller(double r, GammaSolution* fresh = nullptr) {
    const fs::path p = cache_path(r);
    if (!fresh && fs::exists(p)) {
      try {
        ControllerCache c = load_controller(p);
        if (c.plant_hash == ctx.plant_hash && c.controller.K.grid() == ctx.grid &&
            c.controller.radius && *c.controller.radius == r &&
            c.controller.provenance == Provenance::kDrRo) {
          return std::move(c.controller);
        }
      } catch (const Error&) {
        // Unreadable cache: recompute and overwrite.
      }
    }
    GammaSearchConfig g = search_config(cfg);
    g.gamma_ro = ro();
    GammaSolution sol = solve_gamma_star(ctx, RadiusSpec(r), g);
    sol.synthesis.controller.radius = r;
    fs::create_directories(p.parent_path());
    save_controller(p, ControllerCache{ctx.plant_hash, sol.synthesis.controller});
    ControllerSamples k = sol.synthesis.controller;
    if (fresh) *fresh = std::move(sol);
    return k;
  }
};

json state_json(const SynthesisState& st) {
  json j;
  j["iterations"] = st.iters;
  j["newton_steps"] = st.newton_steps;
  j["relaxation_steps"] = st.relaxation_steps;
  j["fixed_point_residual"] = st.fixed_point_residual;
  j["kkt_residual"] = st.kkt_residual;
  j["l_causal_leak"] = st.l_causal_leak;
  j["k_causal_leak"] = st.k_causal_leak;
  j["anticausal_consistency"] = st.anticausal_consistency;
  j["residual_history"] = st.history;
  std::vector<double> b(st.Bbar.data(), st.Bbar.data() + st.Bbar.size());
  j["bbar"] = b;
  return j;
}

std::string impulse_csv(const ControllerSamples& K) {
  const int lags = static_cast<int>(std::min<std::size_t>(512, K.K.size() / 2));
  const ImpulseResponse ir = impulse_response(K, lags);
  std::ostringstream os;
  os << "lag";
  for (int r = 0; r < K.K.rows(); ++r) {
    for (int c = 0; c < K.K.cols(); ++c) os << ",k(" << r << "," << c << ")";
  }
  os << "\n";
  for (int t = 0; t < lags; ++t) {
    os << t;
    for (int r = 0; r < K.K.rows(); ++r) {
      for (int c = 0; c < K.K.cols(); ++c) os << "," << fmt(ir.taps[t](r, c));
    }
    os << "\n";
  }
  return os.str();
}

int cmd_synth(Session& s) {
  const auto t0 = std::chrono::steady_clock::now();
  const RunConfig& c = s.cfg;
  if (!c.gamma && c.radii.size() != 1) config_error("synth needs exactly one --radius");
  if (c.gamma && c.radii.size() > 1) config_error("synth takes at most one --radius");
  fs::create_directories(s.out);

  json diag;
  diag["plant_hash"] = hash_to_hex(s.ctx.plant_hash);
  diag["grid_k"] = c.grid_k;
  ControllerSamples K;
  if (c.gamma) {
    SynthesisConfig sc;
    sc.gamma = *c.gamma;
    sc.fp_tol = c.tol_fp;
    SynthesisResult res = synthesize(sc, s.ctx);
    if (!c.radii.empty()) res.controller.radius = c.radii.front();
    diag["gamma"] = *c.gamma;
    diag["synthesis"] = state_json(res.state);
    K = std::move(res.controller);
  } else {
    const double r = c.radii.front();
    GammaSolution sol;
    K = s.dr_controller(r, &sol);
    diag["r"] = r;
    diag["gamma_star"] = sol.gamma_star;
    diag["gamma_ro_estimate"] = sol.gamma_ro_estimate;
    diag["gamma_residual"] = sol.residual;
    diag["degenerate"] = sol.degenerate;
    json hist = json::array();
    for (auto [g, res] : sol.bracket_history) hist.push_back({g, res});
    diag["bracket_history"] = hist;
    diag["synthesis"] = state_json(sol.synthesis.state);
    const RegretReport rep = evaluate_controller("DR", K, s.ctx, r);
    diag["worst_case_regret"] = rep.worst_case_expected_regret;
    diag["nominal_regret"] = rep.nominal_expected_regret;
  }
  diag["runtime_s"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  save_controller(s.out / "controller.json", ControllerCache{s.ctx.plant_hash, K});
  write_file_atomic(s.out / "synth_diagnostics.json", diag.dump(2) + "\n");
  write_file_atomic(s.out / "impulse_response.csv", impulse_csv(K));
  std::ostringstream samples;
  write_samples_csv(samples, K.K);
  write_file_atomic(s.out / "controller_samples.csv", samples.str());
  s.log << "synth: wrote " << (s.out / "controller.json").string() << "\n";
  return kExitOk;
}

struct Named {
  std::string tag;
  ControllerSamples K;
};

std::vector<double> dedup_radii(std::vector<double> radii, std::ostream& log) {
  std::vector<double> out;
  for (double r : radii) {
    if (std::find(out.begin(), out.end(), r) != out.end()) {
      log << "warning: duplicate radius " << fmt(r) << " ignored\n";
      continue;
    }
    out.push_back(r);
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Named> fixed_controllers(Session& s) {
  std::vector<Named> v;
  v.push_back({"H2", h2_controller(s.ctx)});
  v.push_back({"RO", ro_limit_controller(s.ctx, s.ro(), kRoOffset, search_config(s.cfg))});
  for (const auto& f : s.cfg.imports) {
    v.push_back({fs::path(f).stem().string(), import_controller(f, s.ctx).samples});
  }
  return v;
}

int cmd_eval(Session& s) {
  const RunConfig& c = s.cfg;
  if (c.radii.empty()) config_error("eval needs at least one --radius");
  const std::vector<double> radii = dedup_radii(c.radii, s.log);
  fs::create_directories(s.out);
  const std::vector<Named> fixed = fixed_controllers(s);

  std::ostringstream table, cross, prof, mc;
  table << "controller,r,gamma_star,worst_case_regret,nominal_regret\n";
  cross << "r,controller,under_worst_case_of,expected_regret\n";
  mc << "r,controller,mc_mean,mc_stderr,frequency_value\n";
  std::vector<std::pair<std::string, std::vector<double>>> profiles;
  for (const auto& f : fixed) profiles.emplace_back(f.tag, operator_norm_profile(f.K, s.ctx));

  for (double r : radii) {
    std::vector<Named> all{{"DR", s.dr_controller(r)}};
    all.insert(all.end(), fixed.begin(), fixed.end());
    profiles.emplace_back("DR_r=" + radius_tag(r), operator_norm_profile(all.front().K, s.ctx));
    std::vector<RegretSpectrum> cs;
    std::vector<WorstCaseResult> wcs;
    for (const auto& n : all) {
      cs.push_back(regret_spectrum(n.K, s.ctx));
      wcs.push_back(worst_case_expected_regret(cs.back(), r));
      table << n.tag << "," << fmt(r) << "," << fmt(wcs.back().worst.gamma_star) << ","
            << fmt(wcs.back().value) << "," << fmt(cs.back().mean()) << "\n";
    }
    for (std::size_t i = 0; i < all.size(); ++i) {
      for (std::size_t j = 0; j < all.size(); ++j) {
        cross << fmt(r) << "," << all[i].tag << "," << all[j].tag << ","
              << fmt(expected_regret_under(cs[i], wcs[j].worst.M)) << "\n";
      }
    }
    if (c.mc_trials > 0) {
      MonteCarloConfig mcc;
      mcc.trials = c.mc_trials;
      mcc.horizon = c.mc_horizon;
      mcc.seed = c.seed;
      mcc.threads = c.jobs;
      for (std::size_t i = 0; i < all.size(); ++i) {
        const auto ir = impulse_response(all[i].K, static_cast<int>(
                                                       std::min<std::size_t>(512, s.ctx.grid.size() / 2)));
        const auto res = monte_carlo_expected_regret(s.ctx, ir, wcs[i].worst.M, mcc);
        mc << fmt(r) << "," << all[i].tag << "," << fmt(res.mean) << "," << fmt(res.std_error)
           << "," << fmt(wcs[i].value) << "\n";
      }
    }
  }

  prof << "omega";
  for (const auto& [tag, _] : profiles) prof << "," << tag;
  prof << "\n";
  for (std::size_t i = 0; i < s.ctx.grid.size(); ++i) {
    prof << fmt(s.ctx.grid.omega(i));
    for (const auto& [_, v] : profiles) prof << "," << fmt(v[i]);
    prof << "\n";
  }
  write_file_atomic(s.out / "eval_report.csv", table.str());
  write_file_atomic(s.out / "eval_cross.csv", cross.str());
  write_file_atomic(s.out / "profile.csv", prof.str());
  if (c.mc_trials > 0) write_file_atomic(s.out / "eval_montecarlo.csv", mc.str());
  s.log << "eval: wrote " << (s.out / "eval_report.csv").string() << "\n";
  return kExitOk;
}

struct SweepRow {
  std::string controller;
  double r;
  double gamma_star;
  double worst;
  double nominal;
};

std::string sweep_csv(std::map<double, std::vector<SweepRow>> done) {
  std::ostringstream os;
  os << "controller,r,gamma_star,worst_case_regret,nominal_regret,monotone_in_r\n";
  std::map<std::string, double> last;
  for (const auto& [r, rows] : done) {
    for (const auto& row : rows) {
      bool mono = true;
      if (auto it = last.find(row.controller); it != last.end()) {
        mono = row.worst >= it->second - 1e-9 * std::max(1.0, std::abs(it->second));
      }
      last[row.controller] = row.worst;
      os << row.controller << "," << fmt(row.r) << "," << fmt(row.gamma_star) << ","
         << fmt(row.worst) << "," << fmt(row.nominal) << "," << (mono ? "true" : "false")
         << "\n";
    }
  }
  return os.str();
}

int cmd_sweep(Session& s) {
  if (s.cfg.radii.empty()) config_error("sweep needs --radius values");
  if (s.cfg.radii.size() < 2) config_error("sweep needs at least two --radius values");
  const std::vector<double> radii = dedup_radii(s.cfg.radii, s.log);
  fs::create_directories(s.out);
  const std::vector<Named> fixed = fixed_controllers(s);

  std::map<double, std::vector<SweepRow>> done;
  std::mutex out_mu;
  std::size_t next = 0;
  std::exception_ptr first_error;

  auto work = [&] {
    for (;;) {
      double r;
      {
        std::lock_guard lock(out_mu);
        if (next >= radii.size() || first_error) return;
        r = radii[next++];
      }
      try {
        std::vector<SweepRow> rows;
        GammaSolution sol;
        const ControllerSamples dr = s.dr_controller(r, &sol);
        std::vector<Named> all{{"DR", dr}};
        all.insert(all.end(), fixed.begin(), fixed.end());
        for (const auto& n : all) {
          const RegretReport rep = evaluate_controller(n.tag, n.K, s.ctx, r);
          rows.push_back({n.tag, r, rep.gamma_star, rep.worst_case_expected_regret,
                          rep.nominal_expected_regret});
        }
        std::lock_guard lock(out_mu);
        done[r] = std::move(rows);
        write_file_atomic(s.out / "sweep.csv", sweep_csv(done));
        s.log << "sweep: r = " << fmt(r) << " done\n";
      } catch (...) {
        std::lock_guard lock(out_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  const int jobs = std::min<int>(s.cfg.jobs, static_cast<int>(radii.size()));
  if (jobs <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);
  return kExitOk;
}

void report_error(const std::string& kind, const std::string& msg, int code,
                  const std::string& out_dir, std::ostream& err) {
  json rec{{"error", kind}, {"message", msg}, {"exit_code", code}};
  err << rec.dump() << "\n";
  if (out_dir.empty()) return;
  try {
    fs::create_directories(out_dir);
    write_file_atomic(fs::path(out_dir) / "error.json", rec.dump(2) + "\n");
  } catch (...) {
    // The record on stderr is enough.
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  if (const char* env = std::getenv("DRRO_OUT_DIR"); env && *env) {
    cfg.out_dir = env;
  } else {
    cfg.out_dir = "drro_out";
  }

  CLI::App app{"Distributionally robust regret-optimal controller synthesis"};
  app.require_subcommand(1);
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--plant", cfg.plant, "plant JSON file")->required();
    sub->add_option("--grid-k", cfg.grid_k, "log2 of the frequency grid size [8, 20]");
    sub->add_option("--radius", cfg.radii, "Wasserstein-2 radius (repeatable)")
        ->allow_extra_args(false);
    sub->add_option("--out", cfg.out_dir, "output directory (default $DRRO_OUT_DIR or drro_out)");
    sub->add_option("--seed", cfg.seed, "Monte Carlo seed");
    sub->add_option("--jobs", cfg.jobs, "worker threads");
    sub->add_option("--tol-fp", cfg.tol_fp, "fixed-point tolerance");
    sub->add_option("--tol-gamma", cfg.tol_gamma, "gamma residual tolerance");
    sub->add_option("--import-controller", cfg.imports,
                    "controller cache or state-space JSON (repeatable)")
        ->allow_extra_args(false);
  };
  CLI::App* synth = app.add_subcommand("synth", "synthesize the DR-RO controller at one radius");
  add_common(synth);
  synth->add_option("--gamma", cfg.gamma, "fixed gamma (skips the gamma search)");
  CLI::App* eval = app.add_subcommand("eval", "worst-case regret table for DR, H2, RO and imports");
  add_common(eval);
  eval->add_option("--mc-trials", cfg.mc_trials, "Monte Carlo trials per controller (0 = off)");
  eval->add_option("--mc-horizon", cfg.mc_horizon, "Monte Carlo horizon");
  CLI::App* sweep = app.add_subcommand("sweep", "per-radius regret table");
  add_common(sweep);

  std::vector<std::string> rev(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    report_error("ParseError", e.what(), kExitConfig, "", err);
    return kExitConfig;
  }

  try {
    validate(cfg);
    Session s(cfg, err);
    if (synth->parsed()) return cmd_synth(s);
    if (eval->parsed()) return cmd_eval(s);
    return cmd_sweep(s);
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    report_error(std::string(to_string(e.kind())), e.what(), code, cfg.out_dir, err);
    return code;
  } catch (const fs::filesystem_error& e) {
    report_error("InvalidArgument", e.what(), kExitConfig, cfg.out_dir, err);
    return kExitConfig;
  } catch (const std::exception& e) {
    report_error("NumericalBreakdown", e.what(), kExitNumerical, cfg.out_dir, err);
    return kExitNumerical;
  }
}

}  // namespace drro::cli
