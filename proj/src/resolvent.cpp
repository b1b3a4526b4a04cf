#include "drro/resolvent.hpp"

#include <Eigen/LU>

#include "drro/errors.hpp"

namespace drro {

CMatrix resolvent_solve(Complex z, const Matrix& A, const CMatrix& rhs) {
  CMatrix m = -A.cast<Complex>();
  m.diagonal().array() += z;
  Eigen::PartialPivLU<CMatrix> lu(m);
  if (!(lu.rcond() > 1e-13)) {
    fail(ErrorKind::kSingularResolvent,
         "zI - A is numerically singular at z = (" + std::to_string(z.real()) + ", " +
             std::to_string(z.imag()) + ")");
  }
  return lu.solve(rhs);
}

CMatrix resolvent(Complex z, const Matrix& A) {
  return resolvent_solve(z, A, CMatrix::Identity(A.rows(), A.rows()));
}

}  // namespace drro
