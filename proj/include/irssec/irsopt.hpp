#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "irssec/channel.hpp"
#include "irssec/cvxsolver.hpp"
#include "irssec/secrecy.hpp"
#include "irssec/txopt.hpp"

namespace irssec {

/// For fixed (f1, f2): h_bar_i = H_i f1, h_hat_i = H_i f2 and their outer
/// products, so that |v~^H H_i f1|^2 = Tr(H_bar_i V~).
struct ReflectForms {
  ComplexVector hbar_b;
  ComplexVector hhat_b;
  std::vector<ComplexVector> hbar_e;
  std::vector<ComplexVector> hhat_e;
  HermitianMatrix Hbar_b;
  HermitianMatrix Hhat_b;
  std::vector<HermitianMatrix> Hbar_e;
  std::vector<HermitianMatrix> Hhat_e;
};

ReflectForms effective_vectors(const ChannelSet& ch, const ComplexVector& f1, const ComplexVector& f2);

struct ReflectSlacks {
  double z_b = 1.0;
  std::vector<double> z_e;
};

ReflectSlacks update_z(const HermitianMatrix& V, const ReflectForms& forms, double gamma0);

/// psi_b(V, z_b) and psi_e(V, z_e) in nats.
double psi_b(const HermitianMatrix& V, double z_b, const ReflectForms& forms, double gamma0);
double psi_e(const HermitianMatrix& V, double z_e, const HermitianMatrix& Hbar_e,
             const HermitianMatrix& Hhat_e, double gamma0);

/// Relaxed secrecy objective of a lifted V~ in bits/s/Hz.
double relaxed_reflect_objective(const HermitianMatrix& V, const ReflectForms& forms, double gamma0);

/// Convex program over V~ (variable 0, unit diagonal) for fixed slacks.
LogTraceProgram build_reflect_program(const ReflectSlacks& z, const ReflectForms& forms, double gamma0);

struct Extraction {
  ReflectVector v;
  double objective = 0.0;
  /// Every candidate had a zero reference entry; the principal vector was
  /// used with a regularized reference.
  bool fallback = false;
};

using ReflectObjective = std::function<double(const ReflectVector&)>;

/// Phase projection v_n = exp(j angle(x_n / x_{N+1})) over the principal
/// eigenvector and n_rand draws from CN(0, V), ranked by `objective`. A
/// numerically rank-one V returns its principal projection directly;
/// otherwise the winner gets `refine_sweeps` rounds of per-element phase
/// search.
Extraction extract_v(const HermitianMatrix& V, const ReflectObjective& objective, int n_rand,
                     std::mt19937_64& rng, int refine_sweeps = 2);

/// Cyclic single-phase ascent: for each element a 16-point phase grid and
/// golden-section refinement. Never decreases the objective; returns the
/// final value.
double refine_phases(ReflectVector& v, const ReflectObjective& objective, int sweeps);

/// Cascade alignment for beamformer f: co-phases every reflected path of
/// v~^H H_b f with the direct path.
ReflectVector initial_reflect(const ChannelSet& ch, const ComplexVector& f);

struct ReflectOptions {
  double tol = 1e-4;
  int max_iter = 30;
  int n_rand = 200;
  int refine_sweeps = 2;
  SolverOptions solver;
};

struct ReflectResult {
  ReflectVector v = ReflectVector::ones(0);
  HermitianMatrix V;
  /// Relaxed objective (bits/s/Hz) at the initializer and after each solve.
  std::vector<double> trace;
  double relaxed_objective = 0.0;
  double recovered_objective = 0.0;
  int iterations = 0;
  bool fallback = false;
  SolveStats stats;
};

ReflectResult optimize_reflect(const ChannelSet& ch, const TxSolution& tx, double gamma0,
                               const ReflectOptions& options, std::mt19937_64& rng,
                               const std::optional<ReflectVector>& start = std::nullopt);

}  // namespace irssec
