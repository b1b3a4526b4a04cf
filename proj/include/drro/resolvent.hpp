#pragma once

#include "drro/numerics.hpp"

namespace drro {

// Solves (z I - A) X = rhs. Throws kSingularResolvent when z is numerically an
// eigenvalue of A (reciprocal condition estimate below 1e-13).
CMatrix resolvent_solve(Complex z, const Matrix& A, const CMatrix& rhs);

// (z I - A)^{-1}
CMatrix resolvent(Complex z, const Matrix& A);

}  // namespace drro
