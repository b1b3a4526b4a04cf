#include "drro/core_model.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "drro/errors.hpp"
#include "json_matrix.hpp"
#include "drro/resolvent.hpp"

namespace drro {
namespace {

using nlohmann::json;
using detail::matrix_from_json;
using detail::matrix_to_json;

void fnv1a(std::uint64_t& h, const void* data, std::size_t len) {
  const auto* bytes = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < len; ++i) {
    h ^= bytes[i];
    h *= 0x100000001b3ULL;
  }
}

void hash_matrix(std::uint64_t& h, const Matrix& m) {
  const std::int64_t dims[2] = {m.rows(), m.cols()};
  fnv1a(h, dims, sizeof(dims));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double v = m(i, j);
      fnv1a(h, &v, sizeof(v));
    }
  }
}

bool is_symmetric_pd(const Matrix& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::LLT<Matrix> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

std::uint64_t PlantModel::content_hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Matrix* m : {&a_, &b_u_, &b_w_, &q_, &r_}) hash_matrix(h, *m);
  return h;
}

bool is_stabilizable(const Matrix& A, const Matrix& B) {
  const Eigen::Index n = A.rows();
  Eigen::EigenSolver<Matrix> eig(A, false);
  const double scale = std::max({1.0, A.norm(), B.norm()});
  for (Eigen::Index i = 0; i < n; ++i) {
    const Complex lambda = eig.eigenvalues()(i);
    if (std::abs(lambda) < 1.0 - 1e-12) continue;
    CMatrix pbh(n, n + B.cols());
    pbh.leftCols(n) = lambda * CMatrix::Identity(n, n) - A.cast<Complex>();
    pbh.rightCols(B.cols()) = B.cast<Complex>();
    Eigen::JacobiSVD<CMatrix> svd(pbh);
    const double smallest = svd.singularValues()(n - 1);
    if (smallest <= 1e-10 * scale) return false;
  }
  return true;
}

PlantModel make_plant(Matrix A, Matrix B_u, Matrix B_w, Matrix Q, Matrix R) {
  const Eigen::Index n = A.rows();
  if (n == 0 || A.cols() != n) {
    fail(ErrorKind::kDimensionMismatch, "A must be square and non-empty");
  }
  if (B_u.rows() != n || B_u.cols() < 1) {
    fail(ErrorKind::kDimensionMismatch, "B_u must be n x d with d >= 1");
  }
  if (B_w.rows() != n) fail(ErrorKind::kDimensionMismatch, "B_w must have n rows");
  if (B_w.cols() != 1) {
    fail(ErrorKind::kDisturbanceNotScalar,
         "B_w has " + std::to_string(B_w.cols()) + " columns; only p = 1 is supported");
  }
  if (Q.rows() != n || Q.cols() != n) fail(ErrorKind::kDimensionMismatch, "Q must be n x n");
  if (R.rows() != B_u.cols() || R.cols() != B_u.cols()) {
    fail(ErrorKind::kDimensionMismatch, "R must be d x d");
  }
  if (!is_symmetric_pd(Q)) fail(ErrorKind::kInvalidArgument, "Q must be symmetric positive definite");
  if (!is_symmetric_pd(R)) fail(ErrorKind::kInvalidArgument, "R must be symmetric positive definite");
  if (!is_stabilizable(A, B_u)) fail(ErrorKind::kNotStabilizable, "(A, B_u) is not stabilizable");
  if (!is_stabilizable(A, B_w)) fail(ErrorKind::kNotStabilizable, "(A, B_w) is not stabilizable");

  PlantModel p;
  p.a_ = std::move(A);
  p.b_u_ = std::move(B_u);
  p.b_w_ = std::move(B_w);
  p.q_ = std::move(Q);
  p.r_ = std::move(R);
  return p;
}

PlantModel parse_plant(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::kParseError, e.what());
  }
  if (!j.is_object()) fail(ErrorKind::kParseError, "plant file must be a JSON object");
  return make_plant(matrix_from_json(j, "A"), matrix_from_json(j, "B_u"),
                    matrix_from_json(j, "B_w"), matrix_from_json(j, "Q"),
                    matrix_from_json(j, "R"));
}

PlantModel load_plant(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kParseError, "cannot open plant file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_plant(buffer.str());
}

std::string plant_to_json(const PlantModel& plant) {
  json j;
  j["A"] = matrix_to_json(plant.A());
  j["B_u"] = matrix_to_json(plant.B_u());
  j["B_w"] = matrix_to_json(plant.B_w());
  j["Q"] = matrix_to_json(plant.Q());
  j["R"] = matrix_to_json(plant.R());
  return j.dump(2);
}

FrequencyGrid::FrequencyGrid(int k) : k_(k) {
  if (k < kMinExponent || k > kMaxExponent) {
    fail(ErrorKind::kInvalidArgument,
         "grid exponent k=" + std::to_string(k) + " outside [8, 20]");
  }
}

double FrequencyGrid::omega(std::size_t i) const {
  return 2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(size());
}

Complex FrequencyGrid::z(std::size_t i) const {
  // Exact values at the quarter points keep conjugate symmetry bit-clean.
  const std::size_t n = size();
  if (i == 0) return {1.0, 0.0};
  if (4 * i == n) return {0.0, 1.0};
  if (2 * i == n) return {-1.0, 0.0};
  if (4 * i == 3 * n) return {0.0, -1.0};
  if (2 * i > n) return std::conj(z(n - i));
  return std::polar(1.0, omega(i));
}

GridSamples::GridSamples(FrequencyGrid grid, int rows, int cols)
    : grid_(grid),
      rows_(rows),
      cols_(cols),
      values_(grid.size(), CMatrix::Zero(rows, cols)) {}

GridSamples::GridSamples(FrequencyGrid grid, std::vector<CMatrix> values)
    : grid_(grid), rows_(0), cols_(0), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    fail(ErrorKind::kGridMismatch, "sample count does not match grid size");
  }
  rows_ = static_cast<int>(values_.front().rows());
  cols_ = static_cast<int>(values_.front().cols());
  for (const auto& v : values_) {
    if (v.rows() != rows_ || v.cols() != cols_) {
      fail(ErrorKind::kDimensionMismatch, "inconsistent sample shapes");
    }
  }
}

GridSamples GridSamples::generate(FrequencyGrid grid, int rows, int cols,
                                  const std::function<CMatrix(Complex)>& fn) {
  GridSamples out(grid, rows, cols);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out.values_[i] = fn(grid.z(i));
    if (out.values_[i].rows() != rows || out.values_[i].cols() != cols) {
      fail(ErrorKind::kDimensionMismatch, "generator returned wrong shape");
    }
  }
  return out;
}

std::vector<Complex> GridSamples::entry(int r, int c) const {
  std::vector<Complex> out(values_.size());
  for (std::size_t i = 0; i < values_.size(); ++i) out[i] = values_[i](r, c);
  return out;
}

std::vector<CMatrix> GridSamples::lag_coefficients() const {
  std::vector<CMatrix> out(values_.size(), CMatrix::Zero(rows_, cols_));
  for (int r = 0; r < rows_; ++r) {
    for (int c = 0; c < cols_; ++c) {
      const auto coeffs = idft(entry(r, c));
      for (std::size_t t = 0; t < coeffs.size(); ++t) out[t](r, c) = coeffs[t];
    }
  }
  return out;
}

double GridSamples::sup_abs() const {
  double m = 0.0;
  for (const auto& v : values_) m = std::max(m, v.cwiseAbs().maxCoeff());
  return m;
}

void require_same_grid(const FrequencyGrid& a, const FrequencyGrid& b, const char* where) {
  if (!(a == b)) {
    fail(ErrorKind::kGridMismatch,
         std::string(where) + ": grids differ (k=" + std::to_string(a.exponent()) +
             " vs k=" + std::to_string(b.exponent()) + ")");
  }
}

namespace {
template <typename Op>
GridSamples combine(const GridSamples& a, const GridSamples& b, Op op, const char* where) {
  require_same_grid(a.grid(), b.grid(), where);
  std::vector<CMatrix> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = op(a[i], b[i]);
  return GridSamples(a.grid(), std::move(out));
}
}  // namespace

GridSamples operator-(const GridSamples& a, const GridSamples& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kDimensionMismatch, "GridSamples subtraction shape mismatch");
  }
  return combine(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x - y; }, "operator-");
}

GridSamples operator+(const GridSamples& a, const GridSamples& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    fail(ErrorKind::kDimensionMismatch, "GridSamples addition shape mismatch");
  }
  return combine(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x + y; }, "operator+");
}

GridSamples operator*(const GridSamples& a, const GridSamples& b) {
  if (a.cols() != b.rows()) {
    fail(ErrorKind::kDimensionMismatch, "GridSamples product shape mismatch");
  }
  return combine(a, b, [](const CMatrix& x, const CMatrix& y) -> CMatrix { return x * y; }, "operator*");
}

LagEnergy lag_energy(std::span<const Complex> samples) {
  const auto coeffs = idft(samples);
  const std::size_t n = coeffs.size();
  LagEnergy e;
  for (std::size_t t = 0; t < n; ++t) {
    const double a = std::norm(coeffs[t]);
    if (t == 0) {
      e.zero += a;
    } else if (2 * t == n) {
      e.nyquist += a;
    } else if (2 * t < n) {
      e.positive += a;
    } else {
      e.negative += a;
    }
  }
  return e;
}

LagEnergy lag_energy(const GridSamples& samples) {
  LagEnergy total;
  for (int r = 0; r < samples.rows(); ++r) {
    for (int c = 0; c < samples.cols(); ++c) {
      const LagEnergy e = lag_energy(samples.entry(r, c));
      total.negative += e.negative;
      total.zero += e.zero;
      total.positive += e.positive;
      total.nyquist += e.nyquist;
    }
  }
  return total;
}

namespace {
double leak_ratio(double part, double total) {
  return total > 0.0 ? std::sqrt(part / total) : 0.0;
}
}  // namespace

double causal_leak(const GridSamples& samples) {
  const LagEnergy e = lag_energy(samples);
  return leak_ratio(e.negative, e.total());
}

double causal_leak(std::span<const Complex> samples) {
  const LagEnergy e = lag_energy(samples);
  return leak_ratio(e.negative, e.total());
}

double anticausal_leak(const GridSamples& samples) {
  const LagEnergy e = lag_energy(samples);
  return leak_ratio(e.zero + e.positive, e.total());
}

double conjugate_symmetry_error(const GridSamples& samples) {
  const std::size_t n = samples.size();
  double err = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t mirror = (n - i) % n;
    err = std::max(err, (samples[mirror] - samples[i].conjugate()).cwiseAbs().maxCoeff());
  }
  return err;
}

WeightedPlant weight_plant(const PlantModel& plant) {
  const PsdRoot q = psd_sqrt(plant.Q());
  const PsdRoot r = psd_sqrt(plant.R());
  return WeightedPlant{plant, q.root, r.root, r.inverse_root};
}

PlantResponses eval_plant_responses(const WeightedPlant& wp, const FrequencyGrid& grid) {
  const PlantModel& p = wp.plant;
  const CMatrix left = wp.sqrtQ.cast<Complex>();
  CMatrix rhs(p.n(), p.d() + p.p());
  rhs.leftCols(p.d()) = (p.B_u() * wp.invSqrtR).cast<Complex>();
  rhs.rightCols(p.p()) = p.B_w().cast<Complex>();

  PlantResponses out{GridSamples(grid, p.n(), p.d()), GridSamples(grid, p.n(), p.p())};
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const CMatrix x = left * resolvent_solve(grid.z(i), p.A(), rhs);
    out.F[i] = x.leftCols(p.d());
    out.G[i] = x.rightCols(p.p());
  }
  return out;
}

void write_samples_csv(std::ostream& os, const GridSamples& samples) {
  os << "omega";
  for (int r = 0; r < samples.rows(); ++r) {
    for (int c = 0; c < samples.cols(); ++c) {
      os << ",re(" << r << ',' << c << "),im(" << r << ',' << c << ')';
    }
  }
  os << '\n';
  char buf[64];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", samples.grid().omega(i));
    os << buf;
    for (int r = 0; r < samples.rows(); ++r) {
      for (int c = 0; c < samples.cols(); ++c) {
        std::snprintf(buf, sizeof(buf), ",%.17g", samples[i](r, c).real());
        os << buf;
        std::snprintf(buf, sizeof(buf), ",%.17g", samples[i](r, c).imag());
        os << buf;
      }
    }
    os << '\n';
  }
}

}  // namespace drro
