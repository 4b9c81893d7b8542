#include "irssec/txopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "irssec/error.hpp"

namespace irssec {

EffectiveChannels effective_channels(const ChannelSet& ch, const ComplexVector& v_ext) {
  if (v_ext.size() != ch.H_b.rows()) throw InvalidInput("effective_channels: v_ext size mismatch");
  EffectiveChannels eff;
  eff.h_b = ch.H_b.adjoint() * v_ext;
  eff.H_b = HermitianMatrix::outer(eff.h_b);
  for (const auto& He : ch.H_e) {
    eff.h_e.push_back(He.adjoint() * v_ext);
    eff.H_e.push_back(HermitianMatrix::outer(eff.h_e.back()));
  }
  return eff;
}

TxSlacks update_t(const HermitianMatrix& F1, const HermitianMatrix& F2,
                  const EffectiveChannels& eff, double gamma0) {
  TxSlacks t;
  t.t_b = 1.0 / (gamma0 * trace_inner(eff.H_b, F2) + 1.0);
  const HermitianMatrix F = F1 + F2;
  for (const auto& He : eff.H_e) t.t_e.push_back(1.0 / (gamma0 * trace_inner(He, F) + 1.0));
  return t;
}

double phi_b(const HermitianMatrix& F1, const HermitianMatrix& F2, double t_b,
             const EffectiveChannels& eff, double gamma0) {
  return std::log(gamma0 * trace_inner(eff.H_b, F1 + F2) + 1.0) -
         t_b * (gamma0 * trace_inner(eff.H_b, F2) + 1.0) + std::log(t_b) + 1.0;
}

double phi_e(const HermitianMatrix& F1, const HermitianMatrix& F2, double t_e,
             const HermitianMatrix& H_e, double gamma0) {
  return t_e * (gamma0 * trace_inner(H_e, F1 + F2) + 1.0) -
         std::log(gamma0 * trace_inner(H_e, F2) + 1.0) - std::log(t_e) - 1.0;
}

double relaxed_tx_objective(const HermitianMatrix& F1, const HermitianMatrix& F2,
                            const EffectiveChannels& eff, double gamma0) {
  const HermitianMatrix F = F1 + F2;
  auto rate = [&](const HermitianMatrix& H) {
    return std::log1p(gamma0 * trace_inner(H, F)) - std::log1p(gamma0 * trace_inner(H, F2));
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& He : eff.H_e) worst = std::max(worst, rate(He));
  return (rate(eff.H_b) - worst) / std::numbers::ln2;
}

LogTraceProgram build_tx_program(const TxSlacks& t, const EffectiveChannels& eff, double gamma0,
                                 double p_max, bool allow_jamming) {
  if (!(t.t_b > 0) || t.t_e.size() != eff.H_e.size()) {
    throw InvalidInput("build_tx_program: slacks must be positive, one per eavesdropper");
  }
  for (double te : t.t_e) {
    if (!(te > 0)) throw InvalidInput("build_tx_program: slacks must be positive");
  }
  if (!(p_max >= 0)) throw InvalidInput("build_tx_program: negative power budget");
  const Eigen::Index M = eff.h_b.size();
  const bool zero_power = p_max == 0.0;
  const double scale = zero_power ? 1.0 : p_max;

  LogTraceProgram p;
  p.variables.push_back({M, {}, zero_power, scale});
  p.variables.push_back({M, {}, zero_power || !allow_jamming, scale});

  const HermitianMatrix Gb = eff.H_b * gamma0;
  LogTerm bob;
  bob.arg.offset = 1.0;
  bob.arg.add(0, Gb).add(1, Gb);
  p.objective_logs.push_back(bob);
  p.objective_linear.offset = -t.t_b + std::log(t.t_b) + 1.0;
  p.objective_linear.add(1, Gb * -t.t_b);

  std::vector<ConvexRow> rows;
  for (std::size_t k = 0; k < eff.H_e.size(); ++k) {
    const double te = t.t_e[k];
    const HermitianMatrix Ge = eff.H_e[k] * gamma0;
    ConvexRow row;
    row.linear.offset = te - std::log(te) - 1.0;
    row.linear.add(0, Ge * te).add(1, Ge * te);
    LogTerm jam;
    jam.arg.offset = 1.0;
    jam.arg.add(1, Ge);
    row.logs.push_back(jam);
    rows.push_back(std::move(row));
  }
  epigraph_wrap(p, std::move(rows));

  LinearConstraint budget;
  budget.form.add(0, HermitianMatrix::identity(M)).add(1, HermitianMatrix::identity(M));
  budget.bound = p_max;
  p.constraints.push_back(budget);
  return p;
}

ComplexVector recover_rank1(const HermitianMatrix& F, const VectorObjective& objective, int n_rand,
                            std::mt19937_64& rng) {
  const Eigen::Index M = F.dim();
  const auto eig = herm_eig(F);
  const double l1 = eig.values(0);
  if (!(l1 > 0)) return ComplexVector::Zero(M);
  const double l2 = M > 1 ? std::max(eig.values(1), 0.0) : 0.0;
  if (l2 / l1 <= 1e-6) return std::sqrt(l1) * eig.vectors.col(0);

  const double power = std::max(F.trace(), 0.0);
  const RealVector root = eig.values.cwiseMax(0.0).cwiseSqrt();
  const ComplexMatrix factor = eig.vectors * root.cast<Complex>().asDiagonal();

  ComplexVector best = std::sqrt(power) * eig.vectors.col(0);
  double best_value = objective(best);
  for (int r = 0; r < n_rand; ++r) {
    ComplexVector xi = factor * complex_gaussian(M, 1, rng).col(0);
    const double norm = xi.norm();
    if (!(norm > 0)) continue;
    xi *= std::sqrt(power) / norm;
    const double v = objective(xi);
    if (v > best_value) {
      best_value = v;
      best = std::move(xi);
    }
  }
  return best;
}

void SolveStats::add(const SolverReport& r) {
  ++solves;
  newton_iterations += r.iterations;
  if (r.status != SolverStatus::Converged) ++not_converged;
  worst_kkt = std::max(worst_kkt, r.kkt_residual);
}

void SolveStats::merge(const SolveStats& o) {
  solves += o.solves;
  newton_iterations += o.newton_iterations;
  not_converged += o.not_converged;
  worst_kkt = std::max(worst_kkt, o.worst_kkt);
}

TxSolution initial_tx(const EffectiveChannels& eff, double p_max, bool allow_jamming,
                      std::mt19937_64& rng) {
  const Eigen::Index M = eff.h_b.size();
  TxSolution tx{ComplexVector::Zero(M), ComplexVector::Zero(M)};
  ComplexVector dir = eff.h_b;
  if (!(dir.norm() > 0)) dir = ComplexVector::Unit(M, 0);
  dir.normalize();

  ComplexVector jam = complex_gaussian(M, 1, rng).col(0);
  jam -= dir * dir.dot(jam);
  const bool can_jam = allow_jamming && jam.norm() > 1e-12 * std::sqrt(static_cast<double>(M));
  if (can_jam) {
    tx.f1 = std::sqrt(0.9 * p_max) * dir;
    tx.f2 = std::sqrt(0.1 * p_max) * jam.normalized();
  } else {
    tx.f1 = std::sqrt(p_max) * dir;
  }
  return tx;
}

TxResult optimize_tx(const ChannelSet& ch, const ComplexVector& v_ext, double p_max, double gamma0,
                     const TxOptions& options, std::mt19937_64& rng,
                     const std::optional<TxSolution>& start) {
  if (!(p_max >= 0) || !(gamma0 > 0)) throw InvalidInput("optimize_tx: bad power or gamma0");
  const EffectiveChannels eff = effective_channels(ch, v_ext);
  const Eigen::Index M = ch.antennas();

  TxSolution init = start ? *start : initial_tx(eff, p_max, options.allow_jamming, rng);
  if (!options.allow_jamming) init.f2.setZero();

  TxResult out;
  out.F1 = HermitianMatrix::outer(init.f1);
  out.F2 = HermitianMatrix::outer(init.f2);
  double prev = relaxed_tx_objective(out.F1, out.F2, eff, gamma0);
  out.trace.push_back(prev);

  for (int m = 1; m <= options.max_iter; ++m) {
    const TxSlacks t = update_t(out.F1, out.F2, eff, gamma0);
    const LogTraceProgram prog = build_tx_program(t, eff, gamma0, p_max, options.allow_jamming);
    const SolverReport r = solve(prog, options.solver);
    out.stats.add(r);
    out.iterations = m;
    if (r.status == SolverStatus::Infeasible || r.X.size() != 2) break;
    const double value = relaxed_tx_objective(r.X[0], r.X[1], eff, gamma0);
    // An exact surrogate maximizer cannot lower the objective; a drop is
    // solver inexactness, so the current iterate is as good as it gets.
    if (value < prev) break;
    out.F1 = r.X[0];
    out.F2 = r.X[1];
    out.lifted_trace.push_back(r.objective / std::numbers::ln2);
    out.trace.push_back(value);
    const double change = std::abs(value - prev);
    prev = value;
    if (change <= options.tol * std::abs(value) || change <= 1e-12) break;
  }
  out.relaxed_objective = prev;

  // Recovery: f1 against the principal jamming direction, then f2 against
  // the recovered f1.
  auto secrecy = [&](const ComplexVector& a, const ComplexVector& b) {
    return secrecy_objective(ch, a, b, v_ext, gamma0).raw;
  };
  ComplexVector f2_guess = ComplexVector::Zero(M);
  if (out.F2.trace() > 0) {
    const auto e2 = herm_eig(out.F2);
    f2_guess = std::sqrt(std::max(out.F2.trace(), 0.0)) * e2.vectors.col(0);
  }
  out.tx.f1 = recover_rank1(out.F1, [&](const ComplexVector& f) { return secrecy(f, f2_guess); },
                            options.n_rand, rng);
  out.tx.f2 = options.allow_jamming
                  ? recover_rank1(out.F2, [&](const ComplexVector& f) { return secrecy(out.tx.f1, f); },
                                  options.n_rand, rng)
                  : ComplexVector::Zero(M);
  const double power = out.tx.power();
  if (power > p_max) {
    const double s = p_max > 0 ? std::sqrt(p_max / power) : 0.0;
    out.tx.f1 *= s;
    out.tx.f2 *= s;
  }
  out.recovered_objective = secrecy(out.tx.f1, out.tx.f2);
  return out;
}

}  // namespace irssec
