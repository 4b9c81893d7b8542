#pragma once

#include <vector>

#include "irssec/channel.hpp"
#include "irssec/numerics.hpp"

namespace irssec {

/// Unit-modulus IRS phase vector v. The extended form is [v; 1] (the free
/// global rotation is fixed to zero).
class ReflectVector {
 public:
  /// Throws InvalidInput unless every |v_n| = 1 within 1e-9.
  explicit ReflectVector(ComplexVector v);
  static ReflectVector from_phases(const RealVector& theta);
  static ReflectVector ones(Eigen::Index n);

  const ComplexVector& v() const { return v_; }
  Eigen::Index size() const { return v_.size(); }
  ComplexVector extended() const;

 private:
  ComplexVector v_;
};

/// Extended vector [0, ..., 0, 1] that keeps only the direct Alice link.
ComplexVector direct_only_extended(Eigen::Index n_elements);

struct TxSolution {
  ComplexVector f1;
  ComplexVector f2;

  double power() const { return f1.squaredNorm() + f2.squaredNorm(); }
};

/// gamma0 |v^H H f1|^2 / (gamma0 |v^H H f2|^2 + 1)
double sinr(const ComplexMatrix& H, const ComplexVector& f1, const ComplexVector& f2,
            const ComplexVector& v_ext, double gamma0);

struct SecrecyValue {
  double raw;      // log2(1 + g_b) - max_k log2(1 + g_e)
  double clamped;  // max(raw, 0)
};

SecrecyValue secrecy_objective(const ChannelSet& ch, const ComplexVector& f1,
                               const ComplexVector& f2, const ComplexVector& v_ext,
                               double gamma0);

inline SecrecyValue secrecy_objective(const ChannelSet& ch, const TxSolution& tx,
                                      const ReflectVector& refl, double gamma0) {
  return secrecy_objective(ch, tx.f1, tx.f2, refl.extended(), gamma0);
}

/// dBm -> watts.
double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

}  // namespace irssec
