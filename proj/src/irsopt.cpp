#include "irssec/irsopt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "irssec/error.hpp"

namespace irssec {

ReflectForms effective_vectors(const ChannelSet& ch, const ComplexVector& f1, const ComplexVector& f2) {
  if (f1.size() != ch.antennas() || f2.size() != ch.antennas()) {
    throw InvalidInput("effective_vectors: beamformer size mismatch");
  }
  ReflectForms r;
  r.hbar_b = ch.H_b * f1;
  r.hhat_b = ch.H_b * f2;
  r.Hbar_b = HermitianMatrix::outer(r.hbar_b);
  r.Hhat_b = HermitianMatrix::outer(r.hhat_b);
  for (const auto& He : ch.H_e) {
    r.hbar_e.push_back(He * f1);
    r.hhat_e.push_back(He * f2);
    r.Hbar_e.push_back(HermitianMatrix::outer(r.hbar_e.back()));
    r.Hhat_e.push_back(HermitianMatrix::outer(r.hhat_e.back()));
  }
  return r;
}

ReflectSlacks update_z(const HermitianMatrix& V, const ReflectForms& forms, double gamma0) {
  ReflectSlacks z;
  z.z_b = 1.0 / (gamma0 * trace_inner(forms.Hhat_b, V) + 1.0);
  for (std::size_t k = 0; k < forms.Hbar_e.size(); ++k) {
    z.z_e.push_back(1.0 / (gamma0 * trace_inner(forms.Hbar_e[k] + forms.Hhat_e[k], V) + 1.0));
  }
  return z;
}

double psi_b(const HermitianMatrix& V, double z_b, const ReflectForms& forms, double gamma0) {
  return std::log(gamma0 * trace_inner(forms.Hbar_b + forms.Hhat_b, V) + 1.0) -
         z_b * (gamma0 * trace_inner(forms.Hhat_b, V) + 1.0) + std::log(z_b) + 1.0;
}

double psi_e(const HermitianMatrix& V, double z_e, const HermitianMatrix& Hbar_e,
             const HermitianMatrix& Hhat_e, double gamma0) {
  return z_e * (gamma0 * trace_inner(Hbar_e + Hhat_e, V) + 1.0) -
         std::log(gamma0 * trace_inner(Hhat_e, V) + 1.0) - std::log(z_e) - 1.0;
}

double relaxed_reflect_objective(const HermitianMatrix& V, const ReflectForms& forms, double gamma0) {
  auto rate = [&](const HermitianMatrix& Hbar, const HermitianMatrix& Hhat) {
    return std::log1p(gamma0 * trace_inner(Hbar + Hhat, V)) - std::log1p(gamma0 * trace_inner(Hhat, V));
  };
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < forms.Hbar_e.size(); ++k) worst = std::max(worst, rate(forms.Hbar_e[k], forms.Hhat_e[k]));
  return (rate(forms.Hbar_b, forms.Hhat_b) - worst) / std::numbers::ln2;
}

LogTraceProgram build_reflect_program(const ReflectSlacks& z, const ReflectForms& forms, double gamma0) {
  if (!(z.z_b > 0) || z.z_e.size() != forms.Hbar_e.size()) {
    throw InvalidInput("build_reflect_program: slacks must be positive, one per eavesdropper");
  }
  for (double ze : z.z_e) {
    if (!(ze > 0)) throw InvalidInput("build_reflect_program: slacks must be positive");
  }
  const Eigen::Index n = forms.Hbar_b.dim();

  LogTraceProgram p;
  p.variables.push_back({n, std::vector<std::optional<double>>(static_cast<std::size_t>(n), 1.0), false, 1.0});

  LogTerm bob;
  bob.arg.offset = 1.0;
  bob.arg.add(0, (forms.Hbar_b + forms.Hhat_b) * gamma0);
  p.objective_logs.push_back(bob);
  p.objective_linear.offset = -z.z_b + std::log(z.z_b) + 1.0;
  p.objective_linear.add(0, forms.Hhat_b * (-z.z_b * gamma0));

  std::vector<ConvexRow> rows;
  for (std::size_t k = 0; k < forms.Hbar_e.size(); ++k) {
    const double ze = z.z_e[k];
    ConvexRow row;
    row.linear.offset = ze - std::log(ze) - 1.0;
    row.linear.add(0, (forms.Hbar_e[k] + forms.Hhat_e[k]) * (ze * gamma0));
    LogTerm jam;
    jam.arg.offset = 1.0;
    jam.arg.add(0, forms.Hhat_e[k] * gamma0);
    row.logs.push_back(jam);
    rows.push_back(std::move(row));
  }
  epigraph_wrap(p, std::move(rows));
  return p;
}

namespace {

std::optional<ReflectVector> project(const ComplexVector& x) {
  const Eigen::Index n = x.size() - 1;
  const Complex ref = x(n);
  if (!(std::abs(ref) > 1e-12 * x.norm())) return std::nullopt;
  ComplexVector v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = std::polar(1.0, std::arg(x(i) / ref));
  return ReflectVector(std::move(v));
}

}  // namespace

double refine_phases(ReflectVector& v, const std::function<double(const ReflectVector&)>& objective, int sweeps) {
  const Eigen::Index N = v.size();
  ComplexVector cur = v.v();
  double best = objective(v);
  auto eval_at = [&](Eigen::Index n, double phase) {
    ComplexVector trial = cur;
    trial(n) = std::polar(1.0, phase);
    return objective(ReflectVector(std::move(trial)));
  };
  constexpr int kGrid = 16;
  constexpr double kStep = 2 * std::numbers::pi / kGrid;
  const double inv_phi = (std::sqrt(5.0) - 1) / 2;
  for (int s = 0; s < sweeps; ++s) {
    const double before = best;
    for (Eigen::Index n = 0; n < N; ++n) {
      const double base = std::arg(cur(n));
      double arg_best = base, val_best = best;
      for (int g = 1; g < kGrid; ++g) {
        const double val = eval_at(n, base + g * kStep);
        if (val > val_best) val_best = val, arg_best = base + g * kStep;
      }
      // Golden section inside the best grid cell.
      double a = arg_best - kStep, b = arg_best + kStep;
      double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
      double fc = eval_at(n, c), fd = eval_at(n, d);
      for (int it = 0; it < 30; ++it) {
        if (fc > fd) {
          b = d, d = c, fd = fc;
          c = b - inv_phi * (b - a), fc = eval_at(n, c);
        } else {
          a = c, c = d, fc = fd;
          d = a + inv_phi * (b - a), fd = eval_at(n, d);
        }
      }
      if (std::max(fc, fd) > val_best) val_best = std::max(fc, fd), arg_best = fc > fd ? c : d;
      if (val_best > best) {
        best = val_best;
        cur(n) = std::polar(1.0, arg_best);
      }
    }
    if (!(best > before + 1e-12 * std::abs(before))) break;
  }
  v = ReflectVector(std::move(cur));
  return best;
}

Extraction extract_v(const HermitianMatrix& V, const std::function<double(const ReflectVector&)>& objective,
                     int n_rand, std::mt19937_64& rng, int refine_sweeps) {
  const Eigen::Index dim = V.dim();
  if (dim < 1) throw InvalidInput("extract_v: empty matrix");
  const auto eig = herm_eig(V);
  const ComplexVector principal = eig.vectors.col(0) * std::sqrt(std::max(eig.values(0), 0.0));

  if (dim > 1 && eig.values(0) > 0 && std::max(eig.values(1), 0.0) <= 1e-12 * eig.values(0)) {
    // Numerically rank one: randomization only reproduces the principal vector.
    if (auto v = project(principal)) {
      const double value = objective(*v);
      return Extraction{std::move(*v), value, false};
    }
  }

  std::optional<Extraction> best;
  auto consider = [&](const ComplexVector& x) {
    auto v = project(x);
    if (!v) return;
    const double value = objective(*v);
    if (!best || value > best->objective) best = Extraction{std::move(*v), value, false};
  };
  consider(principal);
  const ComplexMatrix factor = eig.vectors * eig.values.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
  for (int r = 0; r < n_rand; ++r) consider(factor * complex_gaussian(dim, 1, rng).col(0));
  if (best) {
    if (refine_sweeps > 0) best->objective = refine_phases(best->v, objective, refine_sweeps);
    return *best;
  }

  // Reference entry vanished everywhere: treat it as an infinitesimal
  // positive real, so the phases are those of the principal vector.
  const ComplexVector x = eig.vectors.col(0);
  ComplexVector phases(dim - 1);
  for (Eigen::Index i = 0; i + 1 < dim; ++i) phases(i) = std::polar(1.0, std::arg(x(i)));
  ReflectVector v(std::move(phases));
  const double value = objective(v);
  return Extraction{std::move(v), value, true};
}

ReflectVector initial_reflect(const ChannelSet& ch, const ComplexVector& f) {
  const Eigen::Index N = ch.elements();
  const ComplexVector c = ch.H_b * f;
  const double ref = std::abs(c(N)) > 0 ? std::arg(c(N)) : 0.0;
  RealVector theta(N);
  for (Eigen::Index n = 0; n < N; ++n) theta(n) = std::abs(c(n)) > 0 ? std::arg(c(n)) - ref : 0.0;
  return ReflectVector::from_phases(theta);
}

constexpr int kMaxRestarts = 3;

ReflectResult optimize_reflect(const ChannelSet& ch, const TxSolution& tx, double gamma0,
                               const ReflectOptions& options, std::mt19937_64& rng,
                               const std::optional<ReflectVector>& start) {
  if (!(gamma0 > 0)) throw InvalidInput("optimize_reflect: gamma0 must be positive");
  const Eigen::Index N = ch.elements();
  const ReflectForms forms = effective_vectors(ch, tx.f1, tx.f2);
  const ReflectVector init = start ? *start : initial_reflect(ch, tx.f1);
  if (init.size() != N) throw InvalidInput("optimize_reflect: initializer size mismatch");

  auto secrecy = [&](const ReflectVector& v) { return secrecy_objective(ch, tx.f1, tx.f2, v.extended(), gamma0).raw; };

  ReflectResult out;
  out.v = init;
  out.V = HermitianMatrix::outer(init.extended());
  double prev = relaxed_reflect_objective(out.V, forms, gamma0);
  out.trace.push_back(prev);
  out.relaxed_objective = prev;
  out.recovered_objective = secrecy(init);
  if (tx.f1.norm() == 0.0 && tx.f2.norm() == 0.0) return out;

  // MM ascent on the relaxed problem from out.V.
  auto ascend = [&] {
    for (int m = 1; m <= options.max_iter; ++m) {
      const ReflectSlacks z = update_z(out.V, forms, gamma0);
      const SolverReport r = solve(build_reflect_program(z, forms, gamma0), options.solver);
      out.stats.add(r);
      ++out.iterations;
      if (r.status == SolverStatus::Infeasible || r.X.size() != 1) break;
      // Pins hold exactly in the solver's parameterization; restate them.
      ComplexMatrix Vm = r.X[0].mat();
      Vm.diagonal().setOnes();
      const HermitianMatrix V(Vm);
      const double value = relaxed_reflect_objective(V, forms, gamma0);
      // An exact surrogate maximizer cannot lower the objective; a drop is
      // solver inexactness, so the current iterate is as good as it gets.
      if (value < prev) break;
      out.V = V;
      out.trace.push_back(value);
      const double change = std::abs(value - prev);
      prev = value;
      if (change <= options.tol * std::abs(value) || change <= 1e-12) break;
    }
  };

  // The relaxed problem is not concave, so MM can stall at a stationary point
  // that randomization beats. A rank-one V has relaxed value equal to its
  // secrecy rate, so restarting from the recovered vector keeps the relaxed
  // value an upper bound on what is reported.
  bool have = false;
  for (int round = 0; round < kMaxRestarts + 1; ++round) {
    ascend();
    out.relaxed_objective = prev;
    const Extraction ex = extract_v(out.V, secrecy, options.n_rand, rng, options.refine_sweeps);
    if (!have || ex.objective > out.recovered_objective) {
      out.v = ex.v;
      out.recovered_objective = ex.objective;
      out.fallback = ex.fallback;
      have = true;
    }
    const double slack = options.tol * std::max(std::abs(prev), 1e-9);
    if (out.recovered_objective <= prev + slack || round == kMaxRestarts) break;
    out.V = HermitianMatrix::outer(out.v.extended());
    prev = relaxed_reflect_objective(out.V, forms, gamma0);
    out.trace.push_back(prev);
  }
  return out;
}

}  // namespace irssec
