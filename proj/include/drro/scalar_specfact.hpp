#pragma once

#include <vector>

#include "drro/core_model.hpp"

namespace drro {

/// Positive, even (real-coefficient) scalar spectrum sampled on a grid.
class ScalarSpectrum {
 public:
  ScalarSpectrum() = default;
  // Throws kNonPositiveSpectrum on a non-positive or non-finite sample and
  // kInvalidArgument if value(2 pi - w) != value(w) beyond 1e-10 relative.
  ScalarSpectrum(FrequencyGrid grid, std::vector<double> values);

  const FrequencyGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }

 private:
  FrequencyGrid grid_;
  std::vector<double> values_;
};

/// Samples of the causal, causally invertible factor L with |L|^2 = N, and
/// its cepstrum-derived coefficients.
struct ScalarFactor {
  FrequencyGrid grid;
  std::vector<Complex> values;
};

inline constexpr double kMinDynamicRange = 1e-12;

/// Cepstral factorization on the DFT grid:
///   h_t = IDFT(log N)_t,  L(e^{j2 pi n/N}) = exp(h_0/2 + sum_{t=1}^{N/2-1} h_t
///   e^{-j2 pi nt/N} + (-1)^n h_{N/2}/2).
/// Throws kIllConditionedSpectrum when min N / max N < 1e-12.
ScalarFactor spectral_factor_dft(const ScalarSpectrum& spec);

struct FactorResiduals {
  double magnitude_err = 0.0;  // max | |L|^2 - N | / N
  double causal_leak = 0.0;    // negative-lag energy fraction (sqrt) of L
};

FactorResiduals factor_residuals(const ScalarSpectrum& spec, const ScalarFactor& fac);

// Inverse-DFT coefficients l_t of the factor.
std::vector<Complex> factor_coefficients(const ScalarFactor& fac);

}  // namespace drro
