#include "drro/regret.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <thread>

#include "drro/errors.hpp"
#include "drro/gamma_search.hpp"
#include "drro/scalar_specfact.hpp"

namespace drro {

RegretSpectrum::RegretSpectrum(FrequencyGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) fail(ErrorKind::kGridMismatch, "regret spectrum length");
  for (double& v : values_) {
    if (!std::isfinite(v) || v < -1e-9) {
      fail(ErrorKind::kNumericalBreakdown,
           "regret spectrum value " + std::to_string(v) + " (Kcirc optimality violated)");
    }
    v = std::max(v, 0.0);
    sup_ = std::max(sup_, v);
  }
}

double RegretSpectrum::mean() const { return drro::mean(values_); }

RegretSpectrum regret_spectrum(const ControllerSamples& K, const PlantContext& ctx) {
  require_same_grid(K.K.grid(), ctx.grid, "regret_spectrum");
  const auto& f = ctx.factors;
  if (K.K.rows() != f.Kcirc.rows() || K.K.cols() != f.Kcirc.cols()) {
    fail(ErrorKind::kDimensionMismatch, "controller shape does not match the plant");
  }
  std::vector<double> c(K.K.size());
  for (std::size_t i = 0; i < c.size(); ++i) {
    c[i] = (f.Delta[i] * (K.K[i] - f.Kcirc[i])).squaredNorm();
  }
  return RegretSpectrum(ctx.grid, std::move(c));
}

double dual_value(const RegretSpectrum& C, double gamma, double r) {
  if (!(gamma > C.sup())) {
    fail(ErrorKind::kGammaBelowSpectrum, "dual objective needs gamma > sup C");
  }
  std::vector<double> t(C.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = 1.0 / (1.0 - C[i] / gamma);
  return gamma * (r * r - 1.0) + gamma * mean(t);
}

WorstCaseResult worst_case_expected_regret(const RegretSpectrum& C, double r) {
  RadiusSpec rs(r);
  WorstCaseResult out;
  out.worst.grid = C.grid();
  if (!(C.sup() > 0.0)) {
    out.worst.M.assign(C.size(), 1.0);
    return out;
  }
  const double g = solve_dual_gamma(C, rs.r);
  out.worst.gamma_star = g;
  out.worst.M.resize(C.size());
  std::vector<double> dev(C.size());
  for (std::size_t i = 0; i < C.size(); ++i) {
    const double s = 1.0 / (1.0 - C[i] / g);
    out.worst.M[i] = s * s;
    dev[i] = (s - 1.0) * (s - 1.0);
  }
  out.worst.w2_budget = mean(dev);
  out.value = dual_value(C, g, rs.r);
  return out;
}

double expected_regret_under(const RegretSpectrum& C, const std::vector<double>& M) {
  if (M.size() != C.size()) fail(ErrorKind::kGridMismatch, "spectrum lengths differ");
  std::vector<double> t(C.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!(M[i] >= 0.0)) fail(ErrorKind::kInvalidArgument, "disturbance spectrum must be >= 0");
    t[i] = C[i] * M[i];
  }
  return mean(t);
}

std::vector<double> operator_norm_profile(const ControllerSamples& K, const PlantContext& ctx) {
  require_same_grid(K.K.grid(), ctx.grid, "operator_norm_profile");
  const auto& F = ctx.responses.F;
  const auto& G = ctx.responses.G;
  const int n = F.rows();
  const int d = F.cols();
  const int p = G.cols();
  std::vector<double> out(K.K.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    CMatrix tk(n + d, p);
    tk.topRows(n) = F[i] * K.K[i] + G[i];
    tk.bottomRows(d) = K.K[i];
    const CMatrix gram = tk.adjoint() * tk;
    out[i] = p == 1 ? gram(0, 0).real()
                    : Eigen::SelfAdjointEigenSolver<CMatrix>(gram).eigenvalues().maxCoeff();
  }
  return out;
}

namespace {

// Number of leading taps carrying all but `rel` of the energy.
std::size_t trimmed_length(const std::vector<double>& energy, double rel) {
  double total = 0.0;
  for (double e : energy) total += e;
  if (total == 0.0) return 1;
  double tail = total;
  std::size_t k = 0;
  while (k < energy.size() && tail > rel * total) tail -= energy[k++];
  return std::max<std::size_t>(k, 1);
}

constexpr double kTrim = 1e-18;

}  // namespace

MonteCarloResult monte_carlo_expected_regret(const PlantContext& ctx, const ImpulseResponse& taps,
                                             const std::vector<double>& M,
                                             const MonteCarloConfig& cfg) {
  const PlantModel& pl = ctx.plant();
  if (cfg.horizon < 1 || cfg.trials < 2 || cfg.threads < 1) {
    fail(ErrorKind::kInvalidArgument, "Monte Carlo needs horizon >= 1, trials >= 2, threads >= 1");
  }
  if (!(spectral_radius(pl.A()) < 1.0)) {
    fail(ErrorKind::kInvalidArgument, "Monte Carlo rollout requires a stable open loop");
  }
  if (M.size() != ctx.grid.size()) fail(ErrorKind::kGridMismatch, "disturbance spectrum length");
  if (taps.taps.empty()) fail(ErrorKind::kInvalidArgument, "empty controller impulse response");
  const int n = pl.n();
  const int d = pl.d();
  const std::size_t N = ctx.grid.size();

  // Disturbance shaping filter.
  std::vector<double> l{1.0};
  if (!std::all_of(M.begin(), M.end(), [](double m) { return m == 1.0; })) {
    std::vector<Complex> coef;
    try {
      coef = factor_coefficients(spectral_factor_dft(ScalarSpectrum(ctx.grid, M)));
    } catch (const Error& e) {
      fail(ErrorKind::kFactorizationError, std::string("disturbance spectrum: ") + e.what());
    }
    const std::size_t lim = std::min<std::size_t>(cfg.factor_lags, N / 2);
    std::vector<double> e(lim);
    for (std::size_t t = 0; t < lim; ++t) e[t] = std::norm(coef[t]);
    l.resize(trimmed_length(e, kTrim));
    for (std::size_t t = 0; t < l.size(); ++t) l[t] = coef[t].real();
  }

  // Controller taps, d x 1 each.
  std::vector<Vector> kt;
  {
    std::vector<double> e;
    for (const auto& m : taps.taps) e.push_back(m.squaredNorm());
    const std::size_t len = trimmed_length(e, kTrim);
    for (std::size_t t = 0; t < len; ++t) kt.push_back(taps.taps[t].col(0));
  }

  // Two-sided Kcirc taps: kc_pos[j] at lag j >= 0, kc_neg[j] at lag -(j+1).
  std::vector<Vector> kc_pos, kc_neg;
  {
    const std::vector<CMatrix> coef = ctx.factors.Kcirc.lag_coefficients();
    const std::size_t lim = std::min<std::size_t>(cfg.kcirc_lags, N / 2 - 1);
    std::vector<double> ep, en;
    for (std::size_t j = 0; j < lim; ++j) {
      ep.push_back(coef[j].squaredNorm());
      en.push_back(coef[N - 1 - j].squaredNorm());
    }
    const std::size_t lp = trimmed_length(ep, kTrim);
    const std::size_t ln = trimmed_length(en, kTrim);
    for (std::size_t j = 0; j < lp; ++j) kc_pos.push_back(coef[j].col(0).real());
    for (std::size_t j = 0; j < ln; ++j) kc_neg.push_back(coef[N - 1 - j].col(0).real());
  }

  const double rho = std::max(spectral_radius(pl.A()), 1e-3);
  const std::size_t burn_state =
      static_cast<std::size_t>(std::ceil(std::log(1e-13) / std::log(rho))) + 4 * n;
  const std::size_t t0 = std::max(kt.size(), kc_pos.size()) + burn_state;
  const std::size_t T = static_cast<std::size_t>(cfg.horizon);
  const std::size_t len = t0 + T + kc_neg.size();
  const std::size_t nl = l.size();

  const Matrix& A = pl.A();
  const Matrix& Bu = pl.B_u();
  const Vector bw = pl.B_w().col(0);
  const Matrix& sqrtQ = ctx.wp.sqrtQ;
  const Matrix Bu_w = Bu * ctx.wp.invSqrtR;  // acts on weighted inputs

  auto run_trial = [&](int trial) -> double {
    std::seed_seq seq{static_cast<std::uint64_t>(cfg.seed), static_cast<std::uint64_t>(trial)};
    std::mt19937_64 gen(seq);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> e(len + nl - 1);
    for (double& v : e) v = normal(gen);
    std::vector<double> w(len);
    for (std::size_t t = 0; t < len; ++t) {
      double s = 0.0;
      for (std::size_t j = 0; j < nl; ++j) s += l[j] * e[t + nl - 1 - j];
      w[t] = s;
    }
    Vector x = Vector::Zero(n), xc = Vector::Zero(n);
    Vector u(d), uc(d);
    std::vector<double> diff;
    diff.reserve(T);
    const std::size_t end = t0 + T;
    for (std::size_t t = 0; t < end; ++t) {
      u.setZero();
      for (std::size_t j = 0; j < kt.size() && j <= t; ++j) u += kt[j] * w[t - j];
      uc.setZero();
      for (std::size_t j = 0; j < kc_pos.size() && j <= t; ++j) uc += kc_pos[j] * w[t - j];
      for (std::size_t j = 0; j < kc_neg.size(); ++j) uc += kc_neg[j] * w[t + j + 1];
      if (t >= t0) {
        const double ck = (sqrtQ * x).squaredNorm() + u.squaredNorm();
        const double cc = (sqrtQ * xc).squaredNorm() + uc.squaredNorm();
        diff.push_back(ck - cc);
      }
      x = A * x + Bu_w * u + bw * w[t];
      xc = A * xc + Bu_w * uc + bw * w[t];
    }
    const double v = mean(diff);
    if (!std::isfinite(v)) fail(ErrorKind::kNonFiniteSample, "non-finite Monte Carlo regret");
    return v;
  };

  std::vector<double> per_trial(static_cast<std::size_t>(cfg.trials));
  const int nthreads = std::min(cfg.threads, cfg.trials);
  if (nthreads == 1) {
    for (int i = 0; i < cfg.trials; ++i) per_trial[i] = run_trial(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    for (int tid = 0; tid < nthreads; ++tid) {
      pool.emplace_back([&, tid] {
        try {
          for (int i = tid; i < cfg.trials; i += nthreads) per_trial[i] = run_trial(i);
        } catch (...) {
          errors[tid] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  MonteCarloResult out;
  out.trials = cfg.trials;
  out.mean = mean(per_trial);
  std::vector<double> dev(per_trial.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    dev[i] = (per_trial[i] - out.mean) * (per_trial[i] - out.mean);
  }
  const double m = static_cast<double>(cfg.trials);
  const double var = pairwise_sum(dev) / (m - 1.0);
  out.std_error = std::sqrt(var / m);
  return out;
}

RegretReport evaluate_controller(const std::string& tag, const ControllerSamples& K,
                                 const PlantContext& ctx, double r) {
  RegretReport rep;
  rep.controller = tag;
  rep.r = r;
  const RegretSpectrum C = regret_spectrum(K, ctx);
  WorstCaseResult wc = worst_case_expected_regret(C, r);
  rep.gamma_star = wc.worst.gamma_star;
  rep.worst_case_expected_regret = wc.value;
  rep.nominal_expected_regret = C.mean();
  rep.profile = operator_norm_profile(K, ctx);
  rep.worst = std::move(wc.worst);
  return rep;
}

}  // namespace drro
