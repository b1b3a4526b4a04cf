#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace drro {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

// Pairwise (cascade) summation. All grid means go through this so results
// do not depend on how work was split across threads.
double pairwise_sum(std::span<const double> values);
Complex pairwise_sum(std::span<const Complex> values);

inline double mean(std::span<const double> values) {
  return values.empty() ? 0.0
                        : pairwise_sum(values) / static_cast<double>(values.size());
}

struct PsdRoot {
  Matrix root;
  Matrix inverse_root;
};

// Symmetric positive-definite square root via eigendecomposition. Eigenvalues
// are clamped at 1e-14; throws kInvalidArgument if the clamp moves any
// eigenvalue by more than 1e-10 relative to the largest one, or if the input
// is not symmetric.
PsdRoot psd_sqrt(const Matrix& m);

double spectral_radius(const Matrix& a);

// Forward DFT X_k = sum_n x_n e^{-j 2 pi k n / N} and its inverse with 1/N
// scaling. Length must be a power of two.
std::vector<Complex> dft(std::span<const Complex> x);
std::vector<Complex> idft(std::span<const Complex> x);

// Signed lag of DFT bin t on a grid of size n: bins [0, n/2] map to
// non-negative lags, bins (n/2, n) to negative ones.
inline long signed_lag(std::size_t bin, std::size_t n) {
  return bin <= n / 2 ? static_cast<long>(bin)
                      : static_cast<long>(bin) - static_cast<long>(n);
}

}  // namespace drro
