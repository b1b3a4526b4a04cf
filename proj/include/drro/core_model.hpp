#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "drro/numerics.hpp"

namespace drro {

/// Discrete-time LTI plant
///
///   x_{t+1} = A x_t + B_u u_t + B_w w_t,   cost = x'Qx + u'Ru,
///
/// with a scalar disturbance channel (p = 1). Instances are only created
/// through make_plant(), which enforces shapes, Q, R > 0 and stabilizability
/// of (A, B_u) and (A, B_w).
class PlantModel {
 public:
  const Matrix& A() const { return a_; }
  const Matrix& B_u() const { return b_u_; }
  const Matrix& B_w() const { return b_w_; }
  const Matrix& Q() const { return q_; }
  const Matrix& R() const { return r_; }
  int n() const { return static_cast<int>(a_.rows()); }
  int d() const { return static_cast<int>(b_u_.cols()); }
  int p() const { return static_cast<int>(b_w_.cols()); }

  // FNV-1a over the raw matrix bits; changes whenever any entry changes.
  std::uint64_t content_hash() const;

 private:
  friend PlantModel make_plant(Matrix, Matrix, Matrix, Matrix, Matrix);
  PlantModel() = default;
  Matrix a_, b_u_, b_w_, q_, r_;
};

PlantModel make_plant(Matrix A, Matrix B_u, Matrix B_w, Matrix Q, Matrix R);

// PBH test restricted to eigenvalues with |lambda| >= 1.
bool is_stabilizable(const Matrix& A, const Matrix& B);

/// Plant file: a JSON object with rectangular nested arrays "A", "B_u", "B_w",
/// "Q", "R" (row-major).
PlantModel load_plant(const std::filesystem::path& path);
PlantModel parse_plant(const std::string& json_text);
std::string plant_to_json(const PlantModel& plant);

/// 2^k uniformly spaced frequencies omega_n = 2 pi n / N on [0, 2 pi).
class FrequencyGrid {
 public:
  static constexpr int kMinExponent = 8;
  static constexpr int kMaxExponent = 20;
  static constexpr int kDefaultExponent = 12;

  explicit FrequencyGrid(int k = kDefaultExponent);

  int exponent() const { return k_; }
  std::size_t size() const { return std::size_t{1} << k_; }
  double omega(std::size_t i) const;
  // e^{j omega_i}
  Complex z(std::size_t i) const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  int k_;
};

/// Samples of a matrix-valued transfer function on a FrequencyGrid.
class GridSamples {
 public:
  GridSamples() : GridSamples(FrequencyGrid(FrequencyGrid::kMinExponent), 0, 0) {}
  GridSamples(FrequencyGrid grid, int rows, int cols);
  GridSamples(FrequencyGrid grid, std::vector<CMatrix> values);

  static GridSamples generate(FrequencyGrid grid, int rows, int cols,
                              const std::function<CMatrix(Complex z)>& fn);

  const FrequencyGrid& grid() const { return grid_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  const CMatrix& operator[](std::size_t i) const { return values_[i]; }
  CMatrix& operator[](std::size_t i) { return values_[i]; }
  const std::vector<CMatrix>& values() const { return values_; }

  // Entry (r, c) across the grid.
  std::vector<Complex> entry(int r, int c) const;

  // Inverse-DFT coefficients, one rows x cols matrix per bin; bin t holds lag
  // signed_lag(t, N).
  std::vector<CMatrix> lag_coefficients() const;

  // max_i ||X_i||_max
  double sup_abs() const;

 private:
  FrequencyGrid grid_;
  int rows_;
  int cols_;
  std::vector<CMatrix> values_;
};

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b,
                       const char* where);

GridSamples operator-(const GridSamples& a, const GridSamples& b);
GridSamples operator+(const GridSamples& a, const GridSamples& b);
// Pointwise matrix product a_i * b_i.
GridSamples operator*(const GridSamples& a, const GridSamples& b);

/// Energy split of the inverse-DFT coefficients. Lag N/2 is ambiguous in sign
/// and reported separately.
struct LagEnergy {
  double negative = 0.0;     // lags -N/2+1 .. -1
  double zero = 0.0;         // lag 0
  double positive = 0.0;     // lags 1 .. N/2-1
  double nyquist = 0.0;      // lag N/2
  double total() const { return negative + zero + positive + nyquist; }
};

LagEnergy lag_energy(const GridSamples& samples);
LagEnergy lag_energy(std::span<const Complex> samples);

// sqrt(negative-lag energy / total energy); 0 for an all-zero signal.
double causal_leak(const GridSamples& samples);
double causal_leak(std::span<const Complex> samples);
// sqrt(non-negative-lag energy / total); measures departure from strict
// anticausality.
double anticausal_leak(const GridSamples& samples);

// max over bins and entries of |X(2 pi - w) - conj(X(w))|
double conjugate_symmetry_error(const GridSamples& samples);

/// Plant with Q^{1/2}, R^{1/2} folded in; every frequency-domain object is
/// expressed in these coordinates (unit state and input weights).
struct WeightedPlant {
  PlantModel plant;
  Matrix sqrtQ;
  Matrix sqrtR;
  Matrix invSqrtR;
};

WeightedPlant weight_plant(const PlantModel& plant);

struct PlantResponses {
  GridSamples F;  // n x d, u -> weighted x, strictly causal
  GridSamples G;  // n x p, w -> weighted x, strictly causal (w_t enters x_{t+1})
};

/// F(z) = Q^{1/2} (zI - A)^{-1} B_u R^{-1/2},  G(z) = Q^{1/2} (zI - A)^{-1} B_w.
PlantResponses eval_plant_responses(const WeightedPlant& wp,
                                    const FrequencyGrid& grid);

/// CSV with header omega,re(0,0),im(0,0),... in row-major entry order and 17
/// significant digits.
void write_samples_csv(std::ostream& os, const GridSamples& samples);

}  // namespace drro
