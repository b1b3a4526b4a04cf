#pragma once

#include "drro/core_model.hpp"

namespace drro {

struct RiccatiData {
  Matrix P;            // stabilizing DARE solution
  Matrix K_lqr;        // (R + B_u' P B_u)^{-1} B_u' P A
  Matrix A_K;          // A - B_u K_lqr
  Matrix RBPB;         // R + B_u' P B_u
  Matrix sqrtRBPB;
  Matrix invSqrtRBPB;
  double dare_residual = 0.0;  // ||DARE(P)||_F / ||P||_F
  int iterations = 0;
};

/// Finite-dimensional data of the strictly anticausal part of Delta K_o:
/// Abar = A_K', Dbar = A_K' P B_w, Cbar = -(R + B_u' P B_u)^{-1/2} B_u'.
struct AdjointTriple {
  Matrix Abar;
  Matrix Cbar;
  Matrix Dbar;
};

struct FactorDiagnostics {
  double delta_identity = 0.0;    // max ||Delta*Delta - (I + F*F)|| / ||I + F*F||
  double inverse_identity = 0.0;  // max ||Delta DeltaInv - I||
  double tu_residual = 0.0;       // max ||Delta Kcirc - T - U|| / max(1, sup ||Delta Kcirc||)
};

struct CanonicalFactors {
  GridSamples Delta;     // d x d, causal and causally invertible
  GridSamples DeltaInv;  // d x d
  GridSamples Kcirc;     // d x p, noncausal optimum -(I + F*F)^{-1} F* G
  GridSamples Tpart;     // d x p, strictly anticausal part of Delta Kcirc
  GridSamples Upart;     // d x p, causal part of Delta Kcirc
  FactorDiagnostics diagnostics;
};

// Stabilizing solution of P = Q + A'PA - A'PB (R + B'PB)^{-1} B'PA.
// Structure-preserving doubling, with the plain Riccati recursion as a
// fallback. Throws kNoStabilizingSolution.
Matrix solve_dare(const Matrix& A, const Matrix& B, const Matrix& Q, const Matrix& R);

RiccatiData solve_dare(const WeightedPlant& wp);

AdjointTriple adjoint_triple(const RiccatiData& rd, const WeightedPlant& wp);

/// Delta(z)    = (R + B'PB)^{1/2} (I + K_lqr (zI - A)^{-1} B_u) R^{-1/2}
/// DeltaInv(z) = R^{1/2} (I - K_lqr (zI - A_K)^{-1} B_u) (R + B'PB)^{-1/2}
/// Tpart(z)    = Cbar (z^{-1} I - Abar)^{-1} Dbar
/// Upart(z)    = Cbar P (A (zI - A)^{-1} + I) B_w
///
/// Throws kFactorizationIdentityViolated if Delta*Delta = I + F*F (1e-8
/// relative), Delta DeltaInv = I (1e-10) or Delta Kcirc = T + U (1e-6) fail.
CanonicalFactors canonical_factors(const RiccatiData& rd, const WeightedPlant& wp,
                                   const PlantResponses& responses);

}  // namespace drro
