#include "irssec/secrecy.hpp"

#include <algorithm>
#include <cmath>

#include "irssec/error.hpp"

namespace irssec {

ReflectVector::ReflectVector(ComplexVector v) : v_(std::move(v)) {
  for (Eigen::Index n = 0; n < v_.size(); ++n) {
    if (std::abs(std::abs(v_(n)) - 1.0) > 1e-9) {
      throw InvalidInput("reflect vector entries must have unit modulus");
    }
  }
}

ReflectVector ReflectVector::from_phases(const RealVector& theta) {
  ComplexVector v(theta.size());
  for (Eigen::Index n = 0; n < theta.size(); ++n) v(n) = std::polar(1.0, theta(n));
  return ReflectVector(std::move(v));
}

ReflectVector ReflectVector::ones(Eigen::Index n) {
  return ReflectVector(ComplexVector::Ones(n));
}

ComplexVector ReflectVector::extended() const {
  ComplexVector e(v_.size() + 1);
  e.head(v_.size()) = v_;
  e(v_.size()) = 1.0;
  return e;
}

ComplexVector direct_only_extended(Eigen::Index n_elements) {
  ComplexVector e = ComplexVector::Zero(n_elements + 1);
  e(n_elements) = 1.0;
  return e;
}

double sinr(const ComplexMatrix& H, const ComplexVector& f1, const ComplexVector& f2,
            const ComplexVector& v_ext, double gamma0) {
  if (H.rows() != v_ext.size() || H.cols() != f1.size() || H.cols() != f2.size()) {
    throw InvalidInput("sinr: dimension mismatch");
  }
  const ComplexVector h = H.adjoint() * v_ext;  // effective channel, h^H = v^H H
  const double sig = std::norm(h.dot(f1));      // dot conjugates the first argument
  const double jam = std::norm(h.dot(f2));
  return gamma0 * sig / (gamma0 * jam + 1.0);
}

SecrecyValue secrecy_objective(const ChannelSet& ch, const ComplexVector& f1,
                               const ComplexVector& f2, const ComplexVector& v_ext,
                               double gamma0) {
  const double rb = std::log2(1.0 + sinr(ch.H_b, f1, f2, v_ext, gamma0));
  double re = -std::numeric_limits<double>::infinity();
  for (const auto& He : ch.H_e) re = std::max(re, std::log2(1.0 + sinr(He, f1, f2, v_ext, gamma0)));
  const double raw = rb - re;
  return {raw, std::max(raw, 0.0)};
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

}  // namespace irssec
