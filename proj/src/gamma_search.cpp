#include "drro/gamma_search.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "drro/errors.hpp"

namespace drro {

RadiusSpec::RadiusSpec(double radius) : r(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    fail(ErrorKind::kInvalidArgument, "radius must be positive and finite");
  }
}

double wasserstein_residual(const RegretSpectrum& C, double gamma) {
  if (!(gamma > C.sup())) {
    fail(ErrorKind::kGammaBelowSpectrum,
         "gamma " + std::to_string(gamma) + " <= sup C " + std::to_string(C.sup()));
  }
  std::vector<double> t(C.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    // (1 - c)^{-1} - 1 = c / (1 - c) with c = C / gamma
    const double c = C[i] / gamma;
    const double v = c / (1.0 - c);
    t[i] = v * v;
  }
  return mean(t);
}

double solve_dual_gamma(const RegretSpectrum& C, double r) {
  RadiusSpec rs(r);
  if (!(C.sup() > 0.0)) fail(ErrorKind::kInvalidArgument, "dual gamma undefined for C == 0");
  // Residual is +inf at sup C and <= 0 at sup C (1 + r) / r (constant-spectrum bound).
  double lo = C.sup();
  double hi = C.sup() * (1.0 + rs.r) / rs.r;
  const double target = rs.r * rs.r;
  if (wasserstein_residual(C, hi) - target > 0.0) {
    fail(ErrorKind::kBracketFailure, "dual gamma upper bracket not feasible");
  }
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (!(mid > lo && mid < hi)) break;
    if (wasserstein_residual(C, mid) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return hi;
}

namespace {

bool is_infeasible_kind(ErrorKind k) {
  return k == ErrorKind::kGammaInfeasible || k == ErrorKind::kMaxItersExceeded ||
         k == ErrorKind::kNumericalBreakdown || k == ErrorKind::kIllConditionedSpectrum ||
         k == ErrorKind::kImaginaryLeak;
}

std::optional<SynthesisResult> try_synthesize(const PlantContext& ctx, double gamma,
                                              const GammaSearchConfig& cfg,
                                              const std::optional<Matrix>& warm) {
  SynthesisConfig sc;
  sc.gamma = gamma;
  sc.fp_tol = cfg.fp_tol;
  sc.max_iters = cfg.max_iters;
  try {
    return synthesize(sc, ctx, warm);
  } catch (const Error& e) {
    if (is_infeasible_kind(e.kind())) return std::nullopt;
    throw;
  }
}

}  // namespace

GammaRoEstimate estimate_gamma_ro(const PlantContext& ctx, const GammaSearchConfig& cfg) {
  GammaRoEstimate out;
  const GridSamples& T = ctx.factors.Tpart;
  std::vector<double> t2(T.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < T.size(); ++i) {
    t2[i] = T[i].squaredNorm();
    sup = std::max(sup, t2[i]);
  }
  // The regret operator of K_H2 is T itself, so sup |T|^2 = 0 means every
  // gamma > 0 is feasible.
  if (sup <= std::numeric_limits<double>::min()) return out;

  double lo = mean(t2);
  double hi = sup * (1.0 + 1e-3);
  std::optional<SynthesisResult> at_hi = try_synthesize(ctx, hi, cfg, std::nullopt);
  out.history.emplace_back(hi, at_hi.has_value());
  for (int k = 0; !at_hi && k < 40; ++k) {
    lo = hi;
    hi *= 2.0;
    at_hi = try_synthesize(ctx, hi, cfg, std::nullopt);
    out.history.emplace_back(hi, at_hi.has_value());
  }
  if (!at_hi) fail(ErrorKind::kBracketFailure, "no feasible gamma found for the RO estimate");

  Matrix warm = at_hi->state.Bbar;
  while ((hi - lo) > cfg.ro_rel_width * hi) {
    const double mid = 0.5 * (lo + hi);
    auto res = try_synthesize(ctx, mid, cfg, warm);
    out.history.emplace_back(mid, res.has_value());
    if (res) {
      hi = mid;
      warm = res->state.Bbar;
    } else {
      lo = mid;
    }
  }
  out.gamma_ro = hi;
  out.lower = lo;
  out.warm = warm;
  return out;
}

GammaSolution solve_gamma_star(const PlantContext& ctx, RadiusSpec r,
                               const GammaSearchConfig& cfg) {
  GammaSolution sol;
  const double target = r.r * r.r;
  // An absolute tolerance alone is meaningless once r^2 is below it.
  const double tol = std::min(cfg.resid_tol, 1e-6 * target);
  std::optional<Matrix> warm;
  if (cfg.gamma_ro) {
    sol.gamma_ro_estimate = *cfg.gamma_ro;
  } else {
    GammaRoEstimate est = estimate_gamma_ro(ctx, cfg);
    sol.gamma_ro_estimate = est.gamma_ro;
    warm = est.warm;
  }

  struct Trial {
    double gamma;
    double residual;
    SynthesisResult syn;
  };
  auto evaluate = [&](double gamma, const std::optional<Matrix>& start) -> std::optional<Trial> {
    auto syn = try_synthesize(ctx, gamma, cfg, start);
    if (!syn) return std::nullopt;
    const RegretSpectrum C = regret_spectrum(syn->controller, ctx);
    const double res = wasserstein_residual(C, gamma) - target;
    sol.bracket_history.emplace_back(gamma, res);
    return Trial{gamma, res, std::move(*syn)};
  };

  // Lower bracket: closest feasible point above the RO estimate.
  const double base = sol.gamma_ro_estimate > 0.0
                          ? sol.gamma_ro_estimate
                          : std::max(1e-12, 1e-12 * ctx.factors.Upart.sup_abs());
  std::optional<Trial> lo;
  for (double off : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0}) {
    lo = evaluate(base * (1.0 + off), warm);
    if (lo) break;
  }
  if (!lo) fail(ErrorKind::kBracketFailure, "no feasible gamma above the RO estimate");

  const RegretSpectrum c_lo = regret_spectrum(lo->syn.controller, ctx);
  if (!(c_lo.sup() > 0.0)) {
    // No regret to trade off: K_gamma is the same for every gamma.
    sol.degenerate = true;
    sol.gamma_star = lo->gamma;
    sol.residual = lo->residual;
    sol.synthesis = std::move(lo->syn);
    return sol;
  }
  if (lo->residual <= 0.0) {
    fail(ErrorKind::kBracketFailure, "residual at the RO boundary is already below r^2 (r = " +
                                         std::to_string(r.r) + ")");
  }

  std::optional<Trial> hi = evaluate(10.0 * lo->gamma, lo->syn.state.Bbar);
  while (!hi || hi->residual > 0.0) {
    const double g = hi ? 2.0 * hi->gamma : 20.0 * lo->gamma;
    if (g > 1e15) fail(ErrorKind::kBracketFailure, "residual does not cross r^2 below 1e15");
    if (hi) lo = std::move(hi);
    hi = evaluate(g, lo->syn.state.Bbar);
  }

  Trial* best = std::abs(lo->residual) < std::abs(hi->residual) ? &*lo : &*hi;
  while (std::abs(best->residual) > tol &&
         (hi->gamma - lo->gamma) > 1e-10 * hi->gamma) {
    const double mid = hi->gamma / lo->gamma > 2.0 ? std::sqrt(hi->gamma * lo->gamma)
                                                   : 0.5 * (hi->gamma + lo->gamma);
    const Matrix& start = std::abs(mid - lo->gamma) < std::abs(hi->gamma - mid)
                              ? lo->syn.state.Bbar
                              : hi->syn.state.Bbar;
    auto t = evaluate(mid, start);
    if (!t) {
      fail(ErrorKind::kGammaInfeasible,
           "synthesis failed inside the feasible bracket at gamma = " + std::to_string(mid));
    }
    if (t->residual > 0.0) {
      lo = std::move(t);
    } else {
      hi = std::move(t);
    }
    best = std::abs(lo->residual) < std::abs(hi->residual) ? &*lo : &*hi;
  }
  sol.gamma_star = best->gamma;
  sol.residual = best->residual;
  best->syn.controller.radius = r.r;
  sol.synthesis = std::move(best->syn);
  return sol;
}

}  // namespace drro
