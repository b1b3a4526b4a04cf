#pragma once

#include <optional>
#include <string>
#include <vector>

#include "drro/plant_context.hpp"
#include "drro/scalar_specfact.hpp"

namespace drro {

enum class Provenance { kDrRo, kH2, kRO, kImported };

std::string to_string(Provenance p);
Provenance provenance_from_string(const std::string& s);

/// Causal controller K: w -> u (weighted input coordinates) sampled on the
/// grid.
struct ControllerSamples {
  GridSamples K;
  Provenance provenance = Provenance::kImported;
  std::optional<double> gamma_used;
  std::optional<double> radius;
};

// Throws kCausalLeakExceeded if the negative-lag energy fraction of K exceeds
// `max_leak` or kNonFiniteSample if any sample is not finite.
void check_controller(const ControllerSamples& k, double max_leak);

struct SynthesisConfig {
  double gamma = 0.0;
  double fp_tol = 1e-9;  // on ||Phi(B) - B|| / max(1, ||B||)
  int max_iters = 500;
  double damping = 1.0;  // initial relaxation for plain fixed-point steps
};

struct SynthesisState {
  Matrix Bbar;            // n x p
  GridSamples S_minus;    // d x p, strictly anticausal
  ScalarSpectrum Nspec;   // N = |L|^2 >= 1
  ScalarFactor Lfac;
  int iters = 0;
  int newton_steps = 0;
  int relaxation_steps = 0;
  std::vector<double> history;  // fixed-point residual per iteration

  // Certificates evaluated at the returned B̄.
  double fixed_point_residual = 0.0;
  double kkt_residual = 0.0;             // max | |L|^2 - F2(S) | / F2(S)
  double l_causal_leak = 0.0;
  double anticausal_consistency = 0.0;   // max |S - {Delta Kcirc L}_-| / max(1e-300, sup |S|)
  double k_causal_leak = 0.0;
};

struct SynthesisResult {
  SynthesisState state;
  ControllerSamples controller;
};

// F1: B̄ -> Cbar (e^{-jw} I - Abar)^{-1} B̄
GridSamples s_minus_from_bbar(const Matrix& Bbar, const AdjointTriple& triple,
                              const FrequencyGrid& grid);

// F2: N = (1 + sqrt(1 + 4 |S|^2 / gamma))^2 / 4
ScalarSpectrum n_from_s(const GridSamples& S, double gamma);

// F4: B̄ = mean_w (I - e^{jw} Abar)^{-1} Dbar L(e^{jw}); throws kImaginaryLeak
// if the imaginary part exceeds 1e-6 max(1, |Re|).
Matrix bbar_from_l(const ScalarFactor& L, const AdjointTriple& triple);

// One application of F4 o F3 o F2 o F1 using the precomputed resolvents.
Matrix fixed_point_map(const PlantContext& ctx, double gamma, const Matrix& Bbar);

/// Solves B̄ = F4 F3 F2 F1 (B̄) for fixed gamma and returns the
/// gamma-suboptimal controller K = Kcirc - DeltaInv S / L.
///
/// Each iteration first tries a Newton step on B̄ -> Phi(B̄) - B̄ with a
/// finite-difference Jacobian and backtracking; if that does not reduce the
/// residual a relaxed step B̄ + beta (Phi(B̄) - B̄) is taken, halving beta
/// (floor 0.1) whenever successive steps point in opposite directions.
///
/// Errors: kGammaInfeasible when no fixed point is reachable (Newton stalls
/// repeatedly, B̄ blows up, the spectrum becomes too ill-conditioned to
/// factor) or sup C_K >= gamma; kMaxItersExceeded; kNumericalBreakdown when
/// the controller's causal leak exceeds 1e-6.
SynthesisResult synthesize(const SynthesisConfig& cfg, const PlantContext& ctx,
                           const std::optional<Matrix>& warm_start = std::nullopt);

// K = Kcirc - DeltaInv S / L for a given state.
ControllerSamples controller_from_state(const PlantContext& ctx, const SynthesisState& st,
                                        double gamma);

struct ImpulseResponse {
  std::vector<Matrix> taps;  // d x p real, lags 0 .. lags-1
  double tail_energy = 0.0;  // sum_{t >= lags} |k_t|^2 / sum_t |k_t|^2 over lags < N/2
};

ImpulseResponse impulse_response(const ControllerSamples& k, int lags);

}  // namespace drro
