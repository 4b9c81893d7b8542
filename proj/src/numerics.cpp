#include "irssec/numerics.hpp"

#include <algorithm>
#include <sstream>

#include "irssec/error.hpp"

namespace irssec {

HermitianMatrix::HermitianMatrix(const ComplexMatrix& a, double tol) {
  if (a.rows() != a.cols() || a.rows() == 0) {
    std::ostringstream os;
    os << "Hermitian matrix must be square and non-empty, got " << a.rows() << "x"
       << a.cols();
    throw InvalidInput(os.str());
  }
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  const double skew = (a - a.adjoint()).cwiseAbs().maxCoeff();
  if (skew > tol * scale) {
    std::ostringstream os;
    os << "matrix is not Hermitian (max |A - A^H| = " << skew << ", scale " << scale << ")";
    throw InvalidInput(os.str());
  }
  m_ = 0.5 * (a + a.adjoint());
}

HermitianMatrix HermitianMatrix::zero(Eigen::Index dim) {
  return {ComplexMatrix::Zero(dim, dim), Unchecked{}};
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index dim) {
  return {ComplexMatrix::Identity(dim, dim), Unchecked{}};
}

HermitianMatrix HermitianMatrix::diagonal(const RealVector& d) {
  return {d.cast<Complex>().asDiagonal(), Unchecked{}};
}

HermitianMatrix HermitianMatrix::outer(const ComplexVector& x) {
  ComplexMatrix m = x * x.adjoint();
  m.diagonal() = m.diagonal().real().cast<Complex>();
  return {std::move(m), Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator+(const HermitianMatrix& o) const {
  if (o.dim() != dim()) throw InvalidInput("HermitianMatrix +: dimension mismatch");
  return {m_ + o.m_, Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator-(const HermitianMatrix& o) const {
  if (o.dim() != dim()) throw InvalidInput("HermitianMatrix -: dimension mismatch");
  return {m_ - o.m_, Unchecked{}};
}

HermitianMatrix HermitianMatrix::operator*(double s) const { return {m_ * s, Unchecked{}}; }

EigenDecomposition herm_eig(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.mat());
  if (solver.info() != Eigen::Success) throw InvalidInput("eigendecomposition failed");
  const Eigen::Index n = a.dim();
  EigenDecomposition out{RealVector(n), ComplexMatrix(n, n)};
  // Eigen returns ascending order.
  for (Eigen::Index i = 0; i < n; ++i) {
    out.values(i) = solver.eigenvalues()(n - 1 - i);
    out.vectors.col(i) = solver.eigenvectors().col(n - 1 - i);
  }
  return out;
}

EigenDecomposition herm_eig(const ComplexMatrix& a) { return herm_eig(HermitianMatrix(a)); }

double trace_inner(const HermitianMatrix& a, const HermitianMatrix& x) {
  if (a.dim() != x.dim()) throw InvalidInput("trace_inner: dimension mismatch");
  // Tr(A X) = sum_ij A_ij X_ji = sum_ij A_ij conj(X_ij) for Hermitian X.
  return (a.mat().array() * x.mat().conjugate().array()).sum().real();
}

HermitianMatrix psd_project(const HermitianMatrix& a) {
  const auto eig = herm_eig(a);
  const RealVector clamped = eig.values.cwiseMax(0.0);
  ComplexMatrix m = eig.vectors * clamped.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return HermitianMatrix(m, 1e-9);
}

double min_eigenvalue(const HermitianMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(a.mat(), Eigen::EigenvaluesOnly);
  return solver.eigenvalues()(0);
}

}  // namespace irssec
