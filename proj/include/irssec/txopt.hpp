#pragma once

#include <functional>
#include <optional>
#include <random>
#include <vector>

#include "irssec/channel.hpp"
#include "irssec/cvxsolver.hpp"
#include "irssec/secrecy.hpp"

namespace irssec {

/// Rank-one effective channels seen by Alice for a fixed reflect vector:
/// h~_i^H = v~^H H_i and H~_i = h~_i h~_i^H.
struct EffectiveChannels {
  ComplexVector h_b;
  std::vector<ComplexVector> h_e;
  HermitianMatrix H_b;
  std::vector<HermitianMatrix> H_e;
};

EffectiveChannels effective_channels(const ChannelSet& ch, const ComplexVector& v_ext);

struct TxSlacks {
  double t_b = 1.0;
  std::vector<double> t_e;
};

/// Closed-form maximizers of the lower bounds for fixed (F1, F2).
TxSlacks update_t(const HermitianMatrix& F1, const HermitianMatrix& F2,
                  const EffectiveChannels& eff, double gamma0);

/// phi_b(F1, F2, t_b) and phi_e(F1, F2, t_e) in nats.
double phi_b(const HermitianMatrix& F1, const HermitianMatrix& F2, double t_b,
             const EffectiveChannels& eff, double gamma0);
double phi_e(const HermitianMatrix& F1, const HermitianMatrix& F2, double t_e,
             const HermitianMatrix& H_e, double gamma0);

/// Relaxed secrecy objective of lifted (F1, F2) in bits/s/Hz.
double relaxed_tx_objective(const HermitianMatrix& F1, const HermitianMatrix& F2,
                            const EffectiveChannels& eff, double gamma0);

/// Convex program over (F1, F2) for fixed slacks. Variables 0 and 1 are F1
/// and F2; F2 is pinned to zero when `allow_jamming` is false and both are
/// pinned to zero when p_max is 0.
LogTraceProgram build_tx_program(const TxSlacks& t, const EffectiveChannels& eff, double gamma0,
                                 double p_max, bool allow_jamming = true);

using VectorObjective = std::function<double(const ComplexVector&)>;

/// Beamformer from a PSD matrix: the principal eigenpair when F is rank one
/// (lambda_2 / lambda_1 <= 1e-6), otherwise the best of n_rand draws from
/// CN(0, F) rescaled to power Tr(F). The principal direction at power
/// Tr(F) is always part of the candidate pool.
ComplexVector recover_rank1(const HermitianMatrix& F, const VectorObjective& objective, int n_rand,
                            std::mt19937_64& rng);

struct TxOptions {
  double tol = 1e-4;
  int max_iter = 30;
  int n_rand = 200;
  bool allow_jamming = true;
  SolverOptions solver;
};

struct SolveStats {
  int solves = 0;
  int newton_iterations = 0;
  int not_converged = 0;
  double worst_kkt = 0.0;

  void add(const SolverReport& r);
  void merge(const SolveStats& o);
};

struct TxResult {
  TxSolution tx;
  HermitianMatrix F1;
  HermitianMatrix F2;
  /// Relaxed objective (bits/s/Hz) at the initializer and after every
  /// block update.
  std::vector<double> trace;
  /// The lifted-program objective (bits/s/Hz) after each convex solve,
  /// evaluated at the slacks used by that solve.
  std::vector<double> lifted_trace;
  double relaxed_objective = 0.0;
  double recovered_objective = 0.0;
  int iterations = 0;
  SolveStats stats;
};

/// MRT/jamming split initializer: 90% of the power on the effective Bob
/// channel, 10% on a random direction orthogonal to it.
TxSolution initial_tx(const EffectiveChannels& eff, double p_max, bool allow_jamming,
                      std::mt19937_64& rng);

TxResult optimize_tx(const ChannelSet& ch, const ComplexVector& v_ext, double p_max, double gamma0,
                     const TxOptions& options, std::mt19937_64& rng,
                     const std::optional<TxSolution>& start = std::nullopt);

}  // namespace irssec
