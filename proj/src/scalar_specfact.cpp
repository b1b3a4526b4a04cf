#include "drro/scalar_specfact.hpp"

#include <algorithm>
#include <cmath>

#include "drro/errors.hpp"

namespace drro {

ScalarSpectrum::ScalarSpectrum(FrequencyGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    fail(ErrorKind::kGridMismatch, "spectrum length does not match grid");
  }
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!(values_[i] > 0.0) || !std::isfinite(values_[i])) {
      fail(ErrorKind::kNonPositiveSpectrum,
           "spectrum sample " + std::to_string(i) + " = " + std::to_string(values_[i]));
    }
  }
  const std::size_t n = values_.size();
  for (std::size_t i = 1; i < n / 2; ++i) {
    const double a = values_[i];
    const double b = values_[n - i];
    if (std::abs(a - b) > 1e-10 * std::max(a, b)) {
      fail(ErrorKind::kInvalidArgument, "spectrum is not even in omega");
    }
  }
}

ScalarFactor spectral_factor_dft(const ScalarSpectrum& spec) {
  const std::size_t n = spec.size();
  const auto [lo, hi] = std::minmax_element(spec.values().begin(), spec.values().end());
  if (*lo / *hi < kMinDynamicRange) {
    fail(ErrorKind::kIllConditionedSpectrum,
         "spectrum dynamic range " + std::to_string(*lo / *hi) + " below 1e-12");
  }

  std::vector<Complex> log_spec(n);
  for (std::size_t i = 0; i < n; ++i) log_spec[i] = std::log(spec[i]);
  const std::vector<Complex> h = idft(log_spec);

  // Causal half of the cepstrum; the even log-spectrum has real h_t.
  std::vector<Complex> c(n, Complex{});
  c[0] = 0.5 * h[0].real();
  for (std::size_t t = 1; t < n / 2; ++t) c[t] = h[t].real();
  c[n / 2] = 0.5 * h[n / 2].real();

  std::vector<Complex> exponent = dft(c);
  ScalarFactor out{spec.grid(), std::vector<Complex>(n)};
  for (std::size_t i = 0; i < n; ++i) out.values[i] = std::exp(exponent[i]);
  return out;
}

std::vector<Complex> factor_coefficients(const ScalarFactor& fac) {
  return idft(fac.values);
}

FactorResiduals factor_residuals(const ScalarSpectrum& spec, const ScalarFactor& fac) {
  require_same_grid(spec.grid(), fac.grid, "factor_residuals");
  FactorResiduals r;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    r.magnitude_err =
        std::max(r.magnitude_err, std::abs(std::norm(fac.values[i]) - spec[i]) / spec[i]);
  }
  r.causal_leak = causal_leak(std::span<const Complex>(fac.values));
  return r;
}

}  // namespace drro
