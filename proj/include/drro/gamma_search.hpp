#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "drro/regret.hpp"
#include "drro/synthesis.hpp"

namespace drro {

/// Wasserstein-2 radius (per time step).
struct RadiusSpec {
  double r = 0.0;
  explicit RadiusSpec(double radius);
};

/// mean_w ((1 - C(w)/gamma)^{-1} - 1)^2. Throws kGammaBelowSpectrum unless
/// gamma > sup C.
double wasserstein_residual(const RegretSpectrum& C, double gamma);

// gamma in (sup C, sup C (1+r)/r] with wasserstein_residual = r^2, by
// bisection. Requires sup C > 0.
double solve_dual_gamma(const RegretSpectrum& C, double r);

struct GammaSearchConfig {
  double fp_tol = 1e-9;
  int max_iters = 500;
  double resid_tol = 1e-8;
  double ro_rel_width = 1e-4;
  std::optional<double> gamma_ro;  // skip the estimate when known
};

struct GammaRoEstimate {
  double gamma_ro = 0.0;
  double lower = 0.0;              // last infeasible gamma
  std::optional<Matrix> warm;      // B̄ at the returned (feasible) gamma
  std::vector<std::pair<double, bool>> history;  // (gamma, feasible)
};

/// Infimum of gamma for which synthesis converges and sup C_K < gamma,
/// bisected on [mean |T|^2, sup |T|^2 (1 + 1e-3)] to relative width
/// cfg.ro_rel_width. Returns the feasible end.
GammaRoEstimate estimate_gamma_ro(const PlantContext& ctx, const GammaSearchConfig& cfg = {});

struct GammaSolution {
  double gamma_star = 0.0;
  double residual = 0.0;            // wasserstein_residual - r^2
  double gamma_ro_estimate = 0.0;
  bool degenerate = false;          // C_K == 0: every gamma is optimal
  SynthesisResult synthesis;
  std::vector<std::pair<double, double>> bracket_history;  // (gamma, residual)
};

/// Bisection on gamma for the DR-RO controller at radius r. Throws
/// kBracketFailure if no sign change is found on (gamma_ro (1 + 1e-6), 1e15].
GammaSolution solve_gamma_star(const PlantContext& ctx, RadiusSpec r,
                               const GammaSearchConfig& cfg = {});

}  // namespace drro
