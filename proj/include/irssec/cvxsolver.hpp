#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "irssec/numerics.hpp"

namespace irssec {

/// offset + sum_v Re Tr(A_v X_v)
struct AffineTrace {
  struct Term {
    std::size_t var;
    HermitianMatrix coef;
  };
  double offset = 0.0;
  std::vector<Term> terms;

  AffineTrace& add(std::size_t var, HermitianMatrix coef) {
    terms.push_back({var, std::move(coef)});
    return *this;
  }
  double eval(const std::vector<HermitianMatrix>& X) const;
};

/// weight * ln(arg(X))
struct LogTerm {
  double weight = 1.0;
  AffineTrace arg;
};

/// Convex function linear(X) - sum_l w_l ln(arg_l(X)), w_l >= 0.
struct ConvexRow {
  AffineTrace linear;
  std::vector<LogTerm> logs;

  double eval(const std::vector<HermitianMatrix>& X) const;
};

enum class Relation { LessEqual, Equal };

struct LinearConstraint {
  AffineTrace form;
  Relation relation = Relation::LessEqual;
  double bound = 0.0;
};

struct MatrixVariable {
  Eigen::Index dim = 1;
  /// Diagonal entries fixed to a value; either empty or of size dim.
  std::vector<std::optional<double>> pinned_diagonal;
  /// The variable is identically zero and removed from the search space.
  bool fixed_zero = false;
  /// Expected magnitude of the variable; the solver works internally
  /// with X / scale.
  double scale = 1.0;
};

/// maximize   sum_j w_j ln(a_j(X)) + objective_linear(X) [- t]
/// subject to linear trace constraints, X_v PSD, diagonal pins and,
///            when `epigraph` is non-empty, f_k(X) <= t for every row.
struct LogTraceProgram {
  std::vector<MatrixVariable> variables;
  std::vector<LogTerm> objective_logs;
  AffineTrace objective_linear;
  std::vector<LinearConstraint> constraints;
  std::vector<ConvexRow> epigraph;

  bool has_slack() const { return !epigraph.empty(); }
  /// Objective with the slack eliminated (t = max_k f_k).
  double objective(const std::vector<HermitianMatrix>& X) const;
  /// Throws InvalidInput on malformed data.
  void validate() const;
};

/// Replaces the program's epigraph rows: adds slack t, rows f_k <= t and
/// the -t objective term. Maximizing (phi - t) then equals maximizing
/// (phi - max_k f_k).
void epigraph_wrap(LogTraceProgram& program, std::vector<ConvexRow> rows);

enum class SolverStatus { Converged, MaxIter, Infeasible };

std::string to_string(SolverStatus s);

struct SolverOptions {
  double tol_stationarity = 1e-7;
  double tol_feasibility = 1e-9;
  double tol_gap = 1e-8;
  int max_iter = 200;
  double barrier_growth = 10.0;
  /// When set, one line per Newton step.
  std::ostream* log = nullptr;
};

struct SolverReport {
  std::vector<HermitianMatrix> X;
  double t = 0.0;  // epigraph slack (0 when absent)
  double objective = 0.0;
  /// Barrier degree / tau: bound on the optimality gap of the exact
  /// central point.
  double duality_gap = 0.0;
  /// Newton decrement^2 / tau at the returned point: bound on the extra
  /// objective error from inexact centering.
  double stationarity = 0.0;
  double kkt_residual = 0.0;  // max(duality_gap, stationarity)
  double constraint_violation = 0.0;
  int iterations = 0;
  SolverStatus status = SolverStatus::MaxIter;
  /// Objective at the end of each barrier stage.
  std::vector<double> stage_objectives;
};

SolverReport solve(const LogTraceProgram& program, const SolverOptions& options = {});

}  // namespace irssec
