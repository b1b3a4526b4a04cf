#include "drro/numerics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>

#include "drro/errors.hpp"

namespace drro {
namespace {

template <typename T>
T pairwise_sum_impl(std::span<const T> v) {
  constexpr std::size_t kBlock = 32;
  if (v.size() <= kBlock) {
    T acc{};
    for (const T& x : v) acc += x;
    return acc;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum_impl(v.first(half)) + pairwise_sum_impl(v.subspan(half));
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

}  // namespace

double pairwise_sum(std::span<const double> values) {
  return pairwise_sum_impl(values);
}

Complex pairwise_sum(std::span<const Complex> values) {
  return pairwise_sum_impl(values);
}

PsdRoot psd_sqrt(const Matrix& m) {
  if (m.rows() != m.cols()) {
    fail(ErrorKind::kDimensionMismatch, "psd_sqrt: matrix is not square");
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
    fail(ErrorKind::kInvalidArgument, "psd_sqrt: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(0.5 * (m + m.transpose()));
  Vector lambda = eig.eigenvalues();
  const double top = std::max(lambda.maxCoeff(), 0.0);
  constexpr double kFloor = 1e-14;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) < kFloor) {
      if (kFloor - lambda(i) > 1e-10 * std::max(top, 1e-300)) {
        fail(ErrorKind::kInvalidArgument,
             "psd_sqrt: matrix is not positive definite (eigenvalue " +
                 std::to_string(lambda(i)) + ")");
      }
      lambda(i) = kFloor;
    }
  }
  const Matrix& v = eig.eigenvectors();
  const Vector s = lambda.cwiseSqrt();
  PsdRoot out;
  out.root = v * s.asDiagonal() * v.transpose();
  out.inverse_root = v * s.cwiseInverse().asDiagonal() * v.transpose();
  return out;
}

double spectral_radius(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::EigenSolver<Matrix> eig(a, /*computeEigenvectors=*/false);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

std::vector<Complex> dft(std::span<const Complex> x) {
  if (!is_power_of_two(x.size())) {
    fail(ErrorKind::kInvalidArgument, "dft: length must be a power of two");
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out;
  fft.fwd(out, in);
  return out;
}

std::vector<Complex> idft(std::span<const Complex> x) {
  if (!is_power_of_two(x.size())) {
    fail(ErrorKind::kInvalidArgument, "idft: length must be a power of two");
  }
  Eigen::FFT<double> fft;
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out;
  fft.inv(out, in);
  return out;
}

}  // namespace drro
