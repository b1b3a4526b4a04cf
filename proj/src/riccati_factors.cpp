#include "drro/riccati_factors.hpp"

#include <cmath>
#include <optional>

#include <Eigen/LU>

#include "drro/errors.hpp"
#include "drro/resolvent.hpp"

namespace drro {
namespace {

double dare_residual(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R,
                     const Matrix& P) {
  const Matrix BtPA = B.transpose() * P * A;
  const Matrix rhs = Q + A.transpose() * P * A -
                     BtPA.transpose() * (R + B.transpose() * P * B).ldlt().solve(BtPA);
  return (P - rhs).norm() / std::max(P.norm(), 1e-300);
}

bool relative_step_small(const Matrix& next, const Matrix& prev) {
  return (next - prev).norm() <= 1e-14 * std::max(next.norm(), 1e-300);
}

// Doubling iteration (SDA) on (A_k, G_k, H_k); H_k converges to P.
std::optional<Matrix> doubling(const Matrix& A, const Matrix& B, const Matrix& Q,
                               const Matrix& R, int& iterations) {
  const Eigen::Index n = A.rows();
  Matrix a_k = A;
  Matrix g_k = B * R.ldlt().solve(B.transpose());
  Matrix h_k = Q;
  for (iterations = 0; iterations < 100; ++iterations) {
    const Matrix w = Matrix::Identity(n, n) + g_k * h_k;
    Eigen::PartialPivLU<Matrix> lu(w);
    const Matrix v1 = lu.solve(a_k);
    const Matrix v2 = lu.solve(g_k.transpose()).transpose();
    Matrix h_next = h_k + v1.transpose() * h_k * a_k;
    g_k += a_k * v2 * a_k.transpose();
    a_k = a_k * v1;
    if (!h_next.allFinite()) return std::nullopt;
    const bool done = relative_step_small(h_next, h_k);
    h_k = 0.5 * (h_next + h_next.transpose());
    if (done) return h_k;
  }
  return std::nullopt;
}

std::optional<Matrix> riccati_recursion(const Matrix& A, const Matrix& B, const Matrix& Q,
                                        const Matrix& R, int& iterations) {
  Matrix p = Q;
  for (iterations = 0; iterations < 100000; ++iterations) {
    const Matrix BtPA = B.transpose() * p * A;
    Matrix next = Q + A.transpose() * p * A -
                  BtPA.transpose() * (R + B.transpose() * p * B).ldlt().solve(BtPA);
    next = 0.5 * (next + next.transpose());
    if (!next.allFinite()) return std::nullopt;
    if (relative_step_small(next, p)) return next;
    p = std::move(next);
  }
  return std::nullopt;
}

double max_relative(const CMatrix& diff, const CMatrix& ref) {
  return diff.norm() / std::max(ref.norm(), 1e-300);
}

}  // namespace

Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R) {
  int iters = 0;
  auto accept = [&](const std::optional<Matrix>& p) {
    if (!p) return false;
    const Matrix K = (R + B.transpose() * *p * B).ldlt().solve(B.transpose() * *p * A);
    return spectral_radius(A - B * K) < 1.0 &&
           dare_residual(A, B, Q, R, *p) <= 1e-10;
  };
  std::optional<Matrix> p = doubling(A, B, Q, R, iters);
  if (!accept(p)) p = riccati_recursion(A, B, Q, R, iters);
  if (!accept(p)) {
    fail(ErrorKind::kNoStabilizingSolution,
         "DARE iteration did not produce a stabilizing solution");
  }
  return *p;
}

RiccatiData solve_dare(const WeightedPlant& wp) {
  const PlantModel& pl = wp.plant;
  RiccatiData rd;
  rd.P = solve_dare(pl.A(), pl.B_u(), pl.Q(), pl.R());
  rd.RBPB = pl.R() + pl.B_u().transpose() * rd.P * pl.B_u();
  rd.RBPB = 0.5 * (rd.RBPB + rd.RBPB.transpose());
  rd.K_lqr = rd.RBPB.ldlt().solve(pl.B_u().transpose() * rd.P * pl.A());
  rd.A_K = pl.A() - pl.B_u() * rd.K_lqr;
  const PsdRoot root = psd_sqrt(rd.RBPB);
  rd.sqrtRBPB = root.root;
  rd.invSqrtRBPB = root.inverse_root;
  rd.dare_residual = dare_residual(pl.A(), pl.B_u(), pl.Q(), pl.R(), rd.P);
  if (spectral_radius(rd.A_K) >= 1.0) {
    fail(ErrorKind::kNoStabilizingSolution, "closed-loop matrix A_K is not Schur stable");
  }
  return rd;
}

AdjointTriple adjoint_triple(const RiccatiData& rd, const WeightedPlant& wp) {
  const PlantModel& pl = wp.plant;
  if (rd.P.rows() != pl.n() || rd.K_lqr.rows() != pl.d()) {
    fail(ErrorKind::kDimensionMismatch, "Riccati data does not match plant");
  }
  AdjointTriple t;
  t.Abar = rd.A_K.transpose();
  t.Dbar = rd.A_K.transpose() * rd.P * pl.B_w();
  t.Cbar = -rd.invSqrtRBPB * pl.B_u().transpose();
  return t;
}

CanonicalFactors canonical_factors(const RiccatiData& rd, const WeightedPlant& wp,
                                   const PlantResponses& responses) {
  const PlantModel& pl = wp.plant;
  const FrequencyGrid grid = responses.F.grid();
  const int n = pl.n();
  const int d = pl.d();
  const int p = pl.p();
  const AdjointTriple tri = adjoint_triple(rd, wp);

  CanonicalFactors cf{GridSamples(grid, d, d), GridSamples(grid, d, d),
                      GridSamples(grid, d, p), GridSamples(grid, d, p),
                      GridSamples(grid, d, p), {}};

  const CMatrix sqrtRBPB = rd.sqrtRBPB.cast<Complex>();
  const CMatrix invSqrtRBPB = rd.invSqrtRBPB.cast<Complex>();
  const CMatrix sqrtR = wp.sqrtR.cast<Complex>();
  const CMatrix invSqrtR = wp.invSqrtR.cast<Complex>();
  const CMatrix K = rd.K_lqr.cast<Complex>();
  const CMatrix Bu = pl.B_u().cast<Complex>();
  const CMatrix Cbar = tri.Cbar.cast<Complex>();
  const CMatrix CbarP = (tri.Cbar * rd.P).cast<Complex>();
  const CMatrix Ad = pl.A().cast<Complex>();
  const CMatrix Bw = pl.B_w().cast<Complex>();
  const CMatrix Id = CMatrix::Identity(d, d);
  const CMatrix In = CMatrix::Identity(n, n);

  FactorDiagnostics& diag = cf.diagnostics;
  double sup_dk = 0.0;
  double sup_tu = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Complex z = grid.z(i);
    const CMatrix& F = responses.F[i];
    const CMatrix& G = responses.G[i];

    const CMatrix delta = sqrtRBPB * (Id + K * resolvent_solve(z, pl.A(), Bu)) * invSqrtR;
    const CMatrix delta_inv =
        sqrtR * (Id - K * resolvent_solve(z, rd.A_K, Bu)) * invSqrtRBPB;
    const CMatrix spectrum = Id + F.adjoint() * F;
    const CMatrix kcirc = -spectrum.ldlt().solve(F.adjoint() * G);
    const CMatrix tpart = Cbar * resolvent_solve(1.0 / z, tri.Abar, tri.Dbar.cast<Complex>());
    const CMatrix upart = CbarP * (Ad * resolvent(z, pl.A()) + In) * Bw;

    diag.delta_identity = std::max(
        diag.delta_identity, max_relative(delta.adjoint() * delta - spectrum, spectrum));
    diag.inverse_identity =
        std::max(diag.inverse_identity, (delta * delta_inv - Id).norm());
    const CMatrix dk = delta * kcirc;
    sup_dk = std::max(sup_dk, dk.norm());
    sup_tu = std::max(sup_tu, (dk - tpart - upart).norm());

    cf.Delta[i] = delta;
    cf.DeltaInv[i] = delta_inv;
    cf.Kcirc[i] = kcirc;
    cf.Tpart[i] = tpart;
    cf.Upart[i] = upart;
  }
  diag.tu_residual = sup_tu / std::max(1.0, sup_dk);

  if (diag.delta_identity > 1e-8) {
    fail(ErrorKind::kFactorizationIdentityViolated,
         "Delta*Delta != I + F*F (residual " + std::to_string(diag.delta_identity) + ")");
  }
  if (diag.inverse_identity > 1e-10) {
    fail(ErrorKind::kFactorizationIdentityViolated,
         "Delta DeltaInv != I (residual " + std::to_string(diag.inverse_identity) + ")");
  }
  if (diag.tu_residual > 1e-6) {
    fail(ErrorKind::kFactorizationIdentityViolated,
         "Delta Kcirc != T + U (residual " + std::to_string(diag.tu_residual) + ")");
  }
  return cf;
}

}  // namespace drro
