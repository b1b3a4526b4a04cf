#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "drro/plant_context.hpp"
#include "drro/synthesis.hpp"

namespace drro {

/// Scalar regret spectrum C_K(w) = ||Delta (K - Kcirc)||^2 >= 0.
class RegretSpectrum {
 public:
  RegretSpectrum() = default;
  // Values in [-1e-9, 0) are clipped to 0; anything below -1e-9 (or
  // non-finite) throws kNumericalBreakdown.
  RegretSpectrum(FrequencyGrid grid, std::vector<double> values);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double sup() const { return sup_; }
  double mean() const;

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
  double sup_ = 0.0;
};

RegretSpectrum regret_spectrum(const ControllerSamples& K, const PlantContext& ctx);

struct WorstCaseSpectrum {
  FrequencyGrid grid;
  std::vector<double> M;     // (1 - C / gamma)^{-2}
  double gamma_star = 0.0;   // 0 in the degenerate C == 0 case
  double w2_budget = 0.0;    // mean (sqrt(M) - 1)^2
};

struct WorstCaseResult {
  double value = 0.0;
  WorstCaseSpectrum worst;
};

/// Dual value gamma (r^2 - 1) + gamma mean (1 - C/gamma)^{-1} at the gamma
/// solving mean ((1 - C/gamma)^{-1} - 1)^2 = r^2. C == 0 gives (0, M == 1).
WorstCaseResult worst_case_expected_regret(const RegretSpectrum& C, double r);

// Dual objective at a fixed gamma > sup C.
double dual_value(const RegretSpectrum& C, double gamma, double r);

// mean C M
double expected_regret_under(const RegretSpectrum& C, const std::vector<double>& M);

/// lambda_max(T_K* T_K)(w) with T_K = [F K + G; K].
std::vector<double> operator_norm_profile(const ControllerSamples& K, const PlantContext& ctx);

struct MonteCarloConfig {
  int horizon = 200;
  int trials = 10000;
  std::uint64_t seed = 1;
  int threads = 1;
  int kcirc_lags = 512;    // two-sided truncation of Kcirc for the clairvoyant run
  int factor_lags = 512;   // truncation of the disturbance shaping filter
};

struct MonteCarloResult {
  double mean = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

/// Time-domain estimate of the expected regret of the FIR controller `taps`
/// (weighted input coordinates, w -> R^{1/2} u) under disturbances with power
/// spectrum M. Requires a stable open loop (rho(A) < 1).
MonteCarloResult monte_carlo_expected_regret(const PlantContext& ctx, const ImpulseResponse& taps,
                                             const std::vector<double>& M,
                                             const MonteCarloConfig& cfg);

struct RegretReport {
  std::string controller;
  double r = 0.0;
  double gamma_star = 0.0;
  double worst_case_expected_regret = 0.0;
  double nominal_expected_regret = 0.0;
  std::vector<double> profile;
  WorstCaseSpectrum worst;
};

RegretReport evaluate_controller(const std::string& tag, const ControllerSamples& K,
                                 const PlantContext& ctx, double r);

}  // namespace drro
