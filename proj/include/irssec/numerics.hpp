#pragma once

#include <complex>

#include <Eigen/Dense>

namespace irssec {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;

/// Relative tolerance used when accepting a matrix as Hermitian.
inline constexpr double kHermitianTol = 1e-12;

/// Dense Hermitian matrix. Construction checks the Hermitian property
/// (relative to the largest entry magnitude) and stores the symmetrized
/// part (A + A^H) / 2 so that later arithmetic starts from an exactly
/// Hermitian representation.
class HermitianMatrix {
 public:
  HermitianMatrix() = default;
  explicit HermitianMatrix(const ComplexMatrix& a, double tol = kHermitianTol);

  static HermitianMatrix zero(Eigen::Index dim);
  static HermitianMatrix identity(Eigen::Index dim);
  static HermitianMatrix diagonal(const RealVector& d);
  /// x x^H
  static HermitianMatrix outer(const ComplexVector& x);

  Eigen::Index dim() const { return m_.rows(); }
  const ComplexMatrix& mat() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  HermitianMatrix operator+(const HermitianMatrix& o) const;
  HermitianMatrix operator-(const HermitianMatrix& o) const;
  HermitianMatrix operator*(double s) const;

  double trace() const { return m_.diagonal().real().sum(); }

 private:
  struct Unchecked {};
  HermitianMatrix(ComplexMatrix m, Unchecked) : m_(std::move(m)) {}

  ComplexMatrix m_;
};

struct EigenDecomposition {
  RealVector values;     // descending
  ComplexMatrix vectors; // column i pairs with values(i)
};

/// Hermitian eigendecomposition, eigenvalues sorted in descending order.
EigenDecomposition herm_eig(const HermitianMatrix& a);
/// Validating overload: throws InvalidInput for non-square or
/// non-Hermitian input.
EigenDecomposition herm_eig(const ComplexMatrix& a);

/// Re(Tr(A X)).
double trace_inner(const HermitianMatrix& a, const HermitianMatrix& x);

/// Frobenius-nearest positive semidefinite matrix (negative eigenvalues
/// clamped to zero).
HermitianMatrix psd_project(const HermitianMatrix& a);

/// Smallest eigenvalue.
double min_eigenvalue(const HermitianMatrix& a);

}  // namespace irssec
