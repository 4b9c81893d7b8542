#include "irssec/cvxsolver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "irssec/error.hpp"

namespace irssec {

double AffineTrace::eval(const std::vector<HermitianMatrix>& X) const {
  double v = offset;
  for (const auto& term : terms) v += trace_inner(term.coef, X.at(term.var));
  return v;
}

double ConvexRow::eval(const std::vector<HermitianMatrix>& X) const {
  double v = linear.eval(X);
  for (const auto& l : logs) v -= l.weight * std::log(l.arg.eval(X));
  return v;
}

double LogTraceProgram::objective(const std::vector<HermitianMatrix>& X) const {
  double v = objective_linear.eval(X);
  for (const auto& l : objective_logs) v += l.weight * std::log(l.arg.eval(X));
  if (has_slack()) {
    double worst = -std::numeric_limits<double>::infinity();
    for (const auto& row : epigraph) worst = std::max(worst, row.eval(X));
    v -= worst;
  }
  return v;
}

namespace {

void check_form(const AffineTrace& f, const std::vector<MatrixVariable>& vars, const char* what) {
  for (const auto& term : f.terms) {
    if (term.var >= vars.size()) {
      throw InvalidInput(std::string(what) + ": term references unknown variable");
    }
    if (term.coef.dim() != vars[term.var].dim) {
      throw InvalidInput(std::string(what) + ": coefficient dimension mismatch");
    }
  }
}

}  // namespace

void LogTraceProgram::validate() const {
  for (const auto& v : variables) {
    if (v.dim < 1) throw InvalidInput("matrix variable dimension must be >= 1");
    if (!v.pinned_diagonal.empty() &&
        static_cast<Eigen::Index>(v.pinned_diagonal.size()) != v.dim) {
      throw InvalidInput("pinned_diagonal must be empty or have one entry per row");
    }
    if (!(v.scale > 0)) throw InvalidInput("variable scale must be positive");
  }
  for (const auto& l : objective_logs) {
    if (!(l.weight >= 0)) throw InvalidInput("objective log weights must be >= 0 (concavity)");
    check_form(l.arg, variables, "objective log term");
  }
  check_form(objective_linear, variables, "objective linear term");
  for (const auto& c : constraints) check_form(c.form, variables, "linear constraint");
  for (const auto& row : epigraph) {
    check_form(row.linear, variables, "epigraph row");
    for (const auto& l : row.logs) {
      if (!(l.weight >= 0)) throw InvalidInput("epigraph log weights must be >= 0 (convexity)");
      check_form(l.arg, variables, "epigraph log term");
    }
  }
}

void epigraph_wrap(LogTraceProgram& program, std::vector<ConvexRow> rows) {
  if (rows.empty()) throw InvalidInput("epigraph_wrap needs at least one row");
  program.epigraph = std::move(rows);
}

std::string to_string(SolverStatus s) {
  switch (s) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIter: return "max-iter";
    case SolverStatus::Infeasible: return "infeasible";
  }
  return "unknown";
}

namespace {

// Real parameterization of the Hermitian variables. Each parameter owns a
// sparse basis matrix E = sum_s kappa_s e_row e_col^T with at most two
// entries; X_hat = base + sum_i y_i E_i and X = scale * X_hat.
struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  Complex kappa;
};

struct Param {
  std::size_t block;
  int count;
  Entry e[2];
};

struct Block {
  std::size_t var;
  Eigen::Index dim;
  double scale;
  ComplexMatrix base;
  Eigen::Index first;  // first parameter index
  Eigen::Index count;
  std::vector<Eigen::Index> pinned;  // pinned diagonal positions
};

struct LinearForm {
  double c0 = 0.0;
  RealVector a;
  double eval(const RealVector& y) const { return c0 + a.dot(y); }
};

struct LogForm {
  double w;
  LinearForm g;
};

struct RowForm {
  LinearForm lin;
  std::vector<LogForm> logs;
};

class Model {
 public:
  explicit Model(const LogTraceProgram& p) : program_(p) {
    std::vector<std::ptrdiff_t> block_of(p.variables.size(), -1);
    Eigen::Index n = 0;
    for (std::size_t v = 0; v < p.variables.size(); ++v) {
      const auto& var = p.variables[v];
      if (var.fixed_zero) continue;
      Block b{v, var.dim, var.scale, ComplexMatrix::Zero(var.dim, var.dim), n, 0, {}};
      for (Eigen::Index a = 0; a < var.dim; ++a) {
        const bool pinned = !var.pinned_diagonal.empty() && var.pinned_diagonal[a].has_value();
        if (pinned) {
          b.base(a, a) = *var.pinned_diagonal[a] / var.scale;
          b.pinned.push_back(a);
        } else {
          params_.push_back({blocks_.size(), 1, {{a, a, 1.0}, {}}});
        }
      }
      for (Eigen::Index a = 0; a < var.dim; ++a) {
        for (Eigen::Index c = a + 1; c < var.dim; ++c) {
          params_.push_back({blocks_.size(), 2, {{a, c, 1.0}, {c, a, 1.0}}});
          params_.push_back({blocks_.size(), 2, {{a, c, Complex(0, 1)}, {c, a, Complex(0, -1)}}});
        }
      }
      b.count = static_cast<Eigen::Index>(params_.size()) - n;
      n = static_cast<Eigen::Index>(params_.size());
      block_of[v] = static_cast<std::ptrdiff_t>(blocks_.size());
      blocks_.push_back(std::move(b));
    }
    block_of_ = block_of;
    n_matrix_ = n;
    if (p.has_slack()) {
      t_index_ = n;
      ++n;
    }
    n_y_ = n;

    obj_lin_ = compile(p.objective_linear);
    if (t_index_) obj_lin_.a(*t_index_) -= 1.0;
    for (const auto& l : p.objective_logs) obj_logs_.push_back({l.weight, compile(l.arg)});
    for (const auto& c : p.constraints) {
      LinearForm f = compile(c.form);
      f.c0 -= c.bound;
      // Constant rows carry no barrier term; keep only their verdict.
      if (f.a.size() == 0 || f.a.cwiseAbs().maxCoeff() == 0.0) {
        const double scale = 1.0 + std::abs(c.bound);
        const bool ok = c.relation == Relation::LessEqual ? f.c0 <= 1e-12 * scale : std::abs(f.c0) <= 1e-12 * scale;
        if (!ok) constant_infeasible_ = true;
        continue;
      }
      (c.relation == Relation::LessEqual ? ineq_ : eq_).push_back(std::move(f));
    }
    for (const auto& row : p.epigraph) {
      RowForm r{compile(row.linear), {}};
      for (const auto& l : row.logs) r.logs.push_back({l.weight, compile(l.arg)});
      rows_.push_back(std::move(r));
    }
  }

  Eigen::Index n_y() const { return n_y_; }
  Eigen::Index n_matrix() const { return n_matrix_; }
  const std::optional<Eigen::Index>& t_index() const { return t_index_; }
  const std::vector<Block>& blocks() const { return blocks_; }
  const std::vector<Param>& params() const { return params_; }
  const LinearForm& obj_lin() const { return obj_lin_; }
  const std::vector<LogForm>& obj_logs() const { return obj_logs_; }
  const std::vector<LinearForm>& ineq() const { return ineq_; }
  const std::vector<LinearForm>& eq() const { return eq_; }
  const std::vector<RowForm>& rows() const { return rows_; }
  bool constant_infeasible() const { return constant_infeasible_; }

  // Barrier degree: PSD dims + inequality count + epigraph rows.
  double degree() const {
    double m = static_cast<double>(ineq_.size() + rows_.size());
    for (const auto& b : blocks_) m += static_cast<double>(b.dim);
    return m;
  }

  ComplexMatrix block_hat(std::size_t bi, const RealVector& y) const {
    const Block& b = blocks_[bi];
    ComplexMatrix X = b.base;
    for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
      const Param& p = params_[i];
      for (int s = 0; s < p.count; ++s) X(p.e[s].row, p.e[s].col) += y(i) * p.e[s].kappa;
    }
    return X;
  }

  std::vector<HermitianMatrix> unscale(const RealVector& y) const {
    std::vector<HermitianMatrix> X;
    for (const auto& var : program_.variables) X.push_back(HermitianMatrix::zero(var.dim));
    for (std::size_t bi = 0; bi < blocks_.size(); ++bi) {
      X[blocks_[bi].var] = HermitianMatrix(blocks_[bi].scale * block_hat(bi, y), 1e-9);
    }
    return X;
  }

  RealVector pack_identity(double c) const {
    RealVector y = RealVector::Zero(n_y_);
    for (const auto& b : blocks_) {
      for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
        if (params_[i].count == 1) y(i) = c;
      }
    }
    return y;
  }

  double row_value(const RowForm& r, const RealVector& y) const {
    double v = r.lin.eval(y);
    for (const auto& l : r.logs) v -= l.w * std::log(l.g.eval(y));
    return v;
  }

  double objective(const RealVector& y) const {
    double v = obj_lin_.eval(y);
    for (const auto& l : obj_logs_) v += l.w * std::log(l.g.eval(y));
    return v;
  }

 private:
  LinearForm compile(const AffineTrace& f) const {
    LinearForm out{f.offset, RealVector::Zero(n_y_)};
    for (const auto& term : f.terms) {
      const std::ptrdiff_t bi = block_of_[term.var];
      if (bi < 0) continue;  // fixed_zero variable
      const Block& b = blocks_[bi];
      const ComplexMatrix& A = term.coef.mat();
      out.c0 += b.scale * (A.array() * b.base.transpose().array()).sum().real();
      for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
        const Param& p = params_[i];
        Complex s = 0;
        for (int k = 0; k < p.count; ++k) s += p.e[k].kappa * A(p.e[k].col, p.e[k].row);
        out.a(i) = b.scale * s.real();
      }
    }
    return out;
  }

  const LogTraceProgram& program_;
  std::vector<std::ptrdiff_t> block_of_;
  std::vector<Block> blocks_;
  std::vector<Param> params_;
  Eigen::Index n_matrix_ = 0;
  Eigen::Index n_y_ = 0;
  std::optional<Eigen::Index> t_index_;
  LinearForm obj_lin_;
  std::vector<LogForm> obj_logs_;
  std::vector<LinearForm> ineq_;
  bool constant_infeasible_ = false;
  std::vector<LinearForm> eq_;
  std::vector<RowForm> rows_;
};

// Affine map u -> (y, sigma) used to eliminate equality constraints:
// y = y0 + Z u_w, sigma = u_sigma (phase 1 only).
struct Reparam {
  bool identity = true;
  RealVector y0;
  Eigen::MatrixXd Z;

  Eigen::Index free_dim(Eigen::Index n_y) const { return identity ? n_y : Z.cols(); }
  RealVector to_y(const RealVector& uw) const { return identity ? uw : RealVector(y0 + Z * uw); }
};

// Derivatives of the barrier. Dense form: `hess`. Structured form (phase 2
// without equality constraints): hess = D + U U^T where D is the -ln det
// Hessian of the blocks in `X` and U collects the rank-one terms.
struct Derivs {
  double value = 0.0;
  RealVector grad;
  Eigen::MatrixXd hess;
  bool structured = false;
  Eigen::MatrixXd U;
  std::vector<ComplexMatrix> X;
};

// Log-barrier function. Phase 2 minimizes
//   -tau f(y) - sum ln(-h_i) - sum ln(t - f_k) - sum ln det X_hat,
// phase 1 minimizes
//   tau sigma - sum ln(sigma - h_i) - sum ln det(X_hat + sigma I).
class Barrier {
 public:
  Barrier(const Model& m, const Reparam& r, bool phase1)
      : m_(m), r_(r), phase1_(phase1), structured_(!phase1 && r.identity && m.n_matrix() >= 64) {}

  const Model& model() const { return m_; }

  Eigen::Index dim() const { return r_.free_dim(m_.n_y()) + (phase1_ ? 1 : 0); }

  RealVector y_of(const RealVector& u) const {
    return r_.to_y(phase1_ ? RealVector(u.head(u.size() - 1)) : u);
  }

  // Returns false when u lies outside the barrier domain.
  bool evaluate(const RealVector& u, double tau, bool derivs, Derivs& out) const {
    const Eigen::Index ny = m_.n_y();
    const RealVector y = y_of(u);
    const double sigma = phase1_ ? u(u.size() - 1) : 0.0;
    const Eigen::Index nz = ny + (phase1_ ? 1 : 0);
    const Eigen::Index sig = ny;

    double value = 0.0;
    RealVector g;
    Eigen::MatrixXd H;
    std::vector<RealVector> low_rank;
    const bool dense = derivs && !structured_;
    if (derivs) g = RealVector::Zero(nz);
    out.X.clear();
    if (dense) H = Eigen::MatrixXd::Zero(nz, nz);
    // Adds c * v v^T to the y-block of the Hessian (c > 0).
    auto rank_one = [&](double c, const RealVector& v) {
      if (dense) H.topLeftCorner(ny, ny).noalias() += c * v * v.transpose();
      if (structured_) low_rank.push_back(std::sqrt(c) * v);
    };

    if (phase1_) {
      value += tau * sigma;
      if (derivs) g(sig) += tau;
      for (const auto& h : m_.ineq()) {
        const double s = sigma - h.eval(y);
        if (!(s > 0)) return false;
        value -= std::log(s);
        if (derivs) {
          RealVector ds = RealVector::Zero(nz);
          ds.head(ny) = -h.a;
          ds(sig) = 1.0;
          g -= ds / s;
          H.noalias() += ds * ds.transpose() / (s * s);
        }
      }
    } else {
      for (const auto& l : m_.obj_logs()) {
        const double gv = l.g.eval(y);
        if (!(gv > 0)) return false;
        value -= tau * l.w * std::log(gv);
        if (derivs) {
          g.head(ny) -= tau * l.w / gv * l.g.a;
          if (l.w > 0) rank_one(tau * l.w / (gv * gv), l.g.a);
        }
      }
      value -= tau * m_.obj_lin().eval(y);
      if (derivs) g.head(ny) -= tau * m_.obj_lin().a;
      for (const auto& h : m_.ineq()) {
        const double s = -h.eval(y);
        if (!(s > 0)) return false;
        value -= std::log(s);
        if (derivs) {
          g.head(ny) += h.a / s;
          rank_one(1.0 / (s * s), h.a);
        }
      }
      for (const auto& row : m_.rows()) {
        double r = y(*m_.t_index()) - row.lin.eval(y);
        RealVector q;
        if (derivs) {
          q = -row.lin.a;
          q(*m_.t_index()) += 1.0;
        }
        for (const auto& l : row.logs) {
          const double gv = l.g.eval(y);
          if (!(gv > 0)) return false;
          r += l.w * std::log(gv);
          if (derivs) q += (l.w / gv) * l.g.a;
        }
        if (!(r > 0)) return false;
        value -= std::log(r);
        if (derivs) {
          g.head(ny) -= q / r;
          rank_one(1.0 / (r * r), q);
          for (const auto& l : row.logs) {
            const double gv = l.g.eval(y);
            if (l.w > 0) rank_one(l.w / (gv * gv * r), l.g.a);
          }
        }
      }
    }

    for (std::size_t bi = 0; bi < m_.blocks().size(); ++bi) {
      const Block& b = m_.blocks()[bi];
      ComplexMatrix X = m_.block_hat(bi, y);
      if (phase1_) X.diagonal().array() += sigma;
      Eigen::LLT<ComplexMatrix> llt(X);
      if (llt.info() != Eigen::Success) return false;
      const auto diag = llt.matrixLLT().diagonal().real();
      if ((diag.array() <= 0).any()) return false;
      value -= 2.0 * diag.array().log().sum();
      if (!derivs) continue;
      const ComplexMatrix W = llt.solve(ComplexMatrix::Identity(b.dim, b.dim));
      const auto& P = m_.params();
      for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
        const Param& pi = P[i];
        Complex tr = 0;
        for (int s = 0; s < pi.count; ++s) tr += pi.e[s].kappa * W(pi.e[s].col, pi.e[s].row);
        g(i) -= tr.real();
        if (!dense) continue;
        for (Eigen::Index j = i; j < b.first + b.count; ++j) {
          const Param& pj = P[j];
          Complex h = 0;
          for (int s = 0; s < pi.count; ++s) {
            for (int r = 0; r < pj.count; ++r) {
              h += pi.e[s].kappa * pj.e[r].kappa * W(pj.e[r].col, pi.e[s].row) *
                   W(pi.e[s].col, pj.e[r].row);
            }
          }
          H(i, j) += h.real();
          if (j != i) H(j, i) += h.real();
        }
      }
      if (structured_) out.X.push_back(std::move(X));
      if (phase1_) {
        const ComplexMatrix W2 = W * W;
        g(sig) -= W.diagonal().real().sum();
        H(sig, sig) += W.cwiseAbs2().sum();
        for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
          const Param& pi = P[i];
          Complex tr = 0;
          for (int s = 0; s < pi.count; ++s) tr += pi.e[s].kappa * W2(pi.e[s].col, pi.e[s].row);
          H(i, sig) += tr.real();
          H(sig, i) += tr.real();
        }
      }
    }

    out.value = value;
    out.structured = derivs && structured_;
    if (derivs && structured_) {
      out.grad = std::move(g);
      out.U.resize(ny, static_cast<Eigen::Index>(low_rank.size()));
      for (std::size_t j = 0; j < low_rank.size(); ++j) out.U.col(static_cast<Eigen::Index>(j)) = low_rank[j];
    } else if (derivs) {
      if (r_.identity) {
        out.grad = std::move(g);
        out.hess = std::move(H);
      } else {
        // Chain rule through y = y0 + Z u_w.
        const Eigen::Index nw = r_.Z.cols();
        const Eigen::Index nu = nw + (phase1_ ? 1 : 0);
        out.grad = RealVector(nu);
        out.hess = Eigen::MatrixXd(nu, nu);
        out.grad.head(nw) = r_.Z.transpose() * g.head(ny);
        const Eigen::MatrixXd HZ = H.topLeftCorner(ny, ny) * r_.Z;
        out.hess.topLeftCorner(nw, nw) = r_.Z.transpose() * HZ;
        if (phase1_) {
          out.grad(nw) = g(sig);
          const RealVector c = r_.Z.transpose() * H.col(sig).head(ny);
          out.hess.col(nw).head(nw) = c;
          out.hess.row(nw).head(nw) = c.transpose();
          out.hess(nw, nw) = H(sig, sig);
        }
      }
    }
    return true;
  }

 private:
  const Model& m_;
  const Reparam& r_;
  bool phase1_;
  bool structured_;
};

// Solves D x = r for the -ln det part of every block. D maps coordinates y
// to c(W Y W) with c_p(G) = Re Tr(B_p G); its inverse is G -> X G X,
// corrected on pinned diagonal entries so that Y stays in the span.
RealVector apply_logdet_inverse(const Model& m, const std::vector<ComplexMatrix>& X, const RealVector& r) {
  RealVector out = RealVector::Zero(r.size());
  const auto& P = m.params();
  for (std::size_t bi = 0; bi < m.blocks().size(); ++bi) {
    const Block& b = m.blocks()[bi];
    const ComplexMatrix& Xb = X[bi];
    ComplexMatrix G = ComplexMatrix::Zero(b.dim, b.dim);
    for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
      const Param& p = P[i];
      if (p.count == 1) {
        G(p.e[0].row, p.e[0].row) += r(i);
      } else {
        // kappa is 1 for the real part and j for the imaginary part.
        const Complex h = 0.5 * r(i) * p.e[0].kappa;
        G(p.e[0].row, p.e[0].col) += h;
        G(p.e[0].col, p.e[0].row) += std::conj(h);
      }
    }
    ComplexMatrix Y = Xb * G * Xb;
    const auto& pinned = b.pinned;
    if (!pinned.empty()) {
      const Eigen::Index np = static_cast<Eigen::Index>(pinned.size());
      Eigen::MatrixXd S(np, np);
      RealVector rhs(np);
      for (Eigen::Index a = 0; a < np; ++a) {
        rhs(a) = -Y(pinned[a], pinned[a]).real();
        for (Eigen::Index c = 0; c < np; ++c) S(a, c) = std::norm(Xb(pinned[a], pinned[c]));
      }
      const RealVector lambda = S.ldlt().solve(rhs);
      ComplexMatrix Xp(b.dim, np), Xq(np, b.dim);
      for (Eigen::Index a = 0; a < np; ++a) {
        Xp.col(a) = Xb.col(pinned[a]) * lambda(a);
        Xq.row(a) = Xb.row(pinned[a]);
      }
      Y.noalias() += Xp * Xq;
    }
    for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
      const Param& p = P[i];
      const Complex v = Y(p.e[0].row, p.e[0].col);
      out(i) = p.count == 1 ? v.real() : (p.e[0].kappa.imag() != 0.0 ? v.imag() : v.real());
    }
  }
  return out;
}

// D x with D_pq = Re Tr(W B_p W B_q), W = X^-1 per block.
RealVector apply_logdet(const Model& m, const std::vector<ComplexMatrix>& W, const RealVector& x) {
  RealVector out = RealVector::Zero(x.size());
  const auto& P = m.params();
  for (std::size_t bi = 0; bi < m.blocks().size(); ++bi) {
    const Block& b = m.blocks()[bi];
    ComplexMatrix Y = ComplexMatrix::Zero(b.dim, b.dim);
    for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
      const Param& p = P[i];
      for (int s = 0; s < p.count; ++s) Y(p.e[s].row, p.e[s].col) += x(i) * p.e[s].kappa;
    }
    const ComplexMatrix Z = W[bi] * Y * W[bi];
    for (Eigen::Index i = b.first; i < b.first + b.count; ++i) {
      const Param& p = P[i];
      Complex tr = 0;
      for (int s = 0; s < p.count; ++s) tr += p.e[s].kappa * Z(p.e[s].col, p.e[s].row);
      out(i) = tr.real();
    }
  }
  return out;
}

// Solves (D + U U^T) x = rhs, D acting on the matrix coordinates only, by
// the Woodbury identity. The slack coordinate (if any) has no D part and
// enters through a bordered system in (s, x_t) with s = U^T x.
class StructuredSolver {
 public:
  StructuredSolver(const Model& m, const Derivs& d) : m_(m), d_(d) {
    const Eigen::Index nm = m.n_matrix();
    const Eigen::Index r = d.U.cols();
    for (const auto& X : d.X) {
      W_.push_back(X.llt().solve(ComplexMatrix::Identity(X.rows(), X.cols())));
    }
    DU_.resize(nm, r);
    for (Eigen::Index j = 0; j < r; ++j) DU_.col(j) = apply_logdet_inverse(m, d.X, d.U.col(j).head(nm));
    const Eigen::Index k = r + (m.t_index() ? 1 : 0);
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(k, k);
    A.topLeftCorner(r, r) = Eigen::MatrixXd::Identity(r, r) + d.U.topRows(nm).transpose() * DU_;
    if (const auto& t = m.t_index()) {
      A.block(0, r, r, 1) = d.U.row(*t).transpose();
      A.block(r, 0, 1, r) = d.U.row(*t);
    }
    lu_.compute(A);
  }

  // With x_x = D^-1 (b_x - U_x s) and U_t^T s = b_t:
  //   (I + U_x^T D^-1 U_x) s - U_t x_t = U_x^T D^-1 b_x,
  // solved in (s, -x_t) to keep the system symmetric.
  RealVector solve(const RealVector& rhs) const {
    const Eigen::Index nm = m_.n_matrix();
    const Eigen::Index r = d_.U.cols();
    const auto& t = m_.t_index();
    const RealVector Db = apply_logdet_inverse(m_, d_.X, rhs.head(nm));
    RealVector b(r + (t ? 1 : 0));
    b.head(r) = d_.U.topRows(nm).transpose() * Db;
    if (t) b(r) = rhs(*t);
    const RealVector sol = lu_.solve(b);
    RealVector x(rhs.size());
    x.head(nm) = Db - DU_ * sol.head(r);
    if (t) x(*t) = -sol(r);
    return x;
  }

  RealVector apply(const RealVector& x) const {
    RealVector out = d_.U * (d_.U.transpose() * x);
    out.head(m_.n_matrix()) += apply_logdet(m_, W_, x.head(m_.n_matrix()));
    return out;
  }

 private:
  const Model& m_;
  const Derivs& d_;
  std::vector<ComplexMatrix> W_;
  Eigen::MatrixXd DU_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

// Newton step -H^-1 g with two rounds of iterative refinement: the
// Woodbury solve loses accuracy once the rank-one terms dominate D.
RealVector structured_direction(const Model& m, const Derivs& d) {
  const StructuredSolver S(m, d);
  const RealVector b = -d.grad;
  RealVector x = S.solve(b);
  for (int round = 0; round < 2; ++round) x += S.solve(b - S.apply(x));
  return x;
}

RealVector newton_direction(const Derivs& d, const Model& m) {
  if (d.structured) return structured_direction(m, d);
  const Eigen::Index n = d.grad.size();
  RealVector scale(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double h = d.hess(i, i);
    scale(i) = h > 0 ? 1.0 / std::sqrt(h) : 1.0;
  }
  const Eigen::MatrixXd Hs = scale.asDiagonal() * d.hess * scale.asDiagonal();
  const RealVector gs = scale.cwiseProduct(d.grad);
  Eigen::LLT<Eigen::MatrixXd> llt(Hs);
  RealVector step;
  if (llt.info() == Eigen::Success) {
    step = -llt.solve(gs);
  } else {
    Eigen::MatrixXd reg = Hs;
    reg.diagonal().array() += 1e-10;
    step = -Eigen::LDLT<Eigen::MatrixXd>(reg).solve(gs);
  }
  return scale.cwiseProduct(step);
}

struct CenterResult {
  bool ok = true;  // false: iteration budget exhausted
  bool early = false;
};

// Damped Newton centering at fixed tau. `stop_early` is polled after every
// accepted step (used by phase 1).
template <typename StopFn>
CenterResult center(const Barrier& f, RealVector& u, double tau, int& iters, int max_iter,
                    std::ostream* log, int phase, double tol_stationarity, StopFn stop_early) {
  // Half squared decrement target. Tightens with tau so the reported
  // stationarity (decrement^2 / tau) stays well below tolerance; capped so
  // late stages are not held hostage to Hessian round-off.
  const double kCenterTol = std::clamp(0.05 * tol_stationarity * tau, 1e-11, 1e-3);
  Derivs d;
  Derivs trial;
  for (;;) {
    if (!f.evaluate(u, tau, true, d)) throw std::logic_error("barrier left its domain");
    const RealVector step = newton_direction(d, f.model());
    const double lambda2 = -d.grad.dot(step);
    if (!(lambda2 > 2 * kCenterTol)) return {};
    if (iters >= max_iter) return {false, false};

    const bool quadratic = lambda2 < 0.04;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 80; ++ls, alpha *= 0.5) {
      const RealVector cand = u + alpha * step;
      if (!f.evaluate(cand, tau, false, trial)) continue;
      if (quadratic || trial.value <= d.value - 0.25 * alpha * lambda2) {
        u = cand;
        accepted = true;
        break;
      }
    }
    ++iters;
    if (log) {
      *log << "phase=" << phase << " iter=" << iters << " tau=" << tau << " value=" << d.value
           << " decrement2=" << lambda2 << " step=" << (accepted ? alpha : 0.0) << "\n";
    }
    // Round-off floor: no representable decrease left.
    if (!accepted) return {};
    if (stop_early(u)) return {true, true};
  }
}

}  // namespace

SolverReport solve(const LogTraceProgram& program, const SolverOptions& options) {
  program.validate();
  const Model model(program);
  const Eigen::Index ny = model.n_y();

  SolverReport report;
  report.status = SolverStatus::MaxIter;
  if (model.constant_infeasible()) {
    report.status = SolverStatus::Infeasible;
    return report;
  }

  // Equality constraints: y = y0 + Z w.
  Reparam rep;
  if (!model.eq().empty()) {
    const Eigen::Index me = static_cast<Eigen::Index>(model.eq().size());
    Eigen::MatrixXd A(me, ny);
    RealVector b(me);
    for (Eigen::Index i = 0; i < me; ++i) {
      A.row(i) = model.eq()[i].a.transpose();
      b(i) = -model.eq()[i].c0;
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV | Eigen::ComputeThinU);
    const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
    Eigen::Index rank = 0;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
      if (svd.singularValues()(i) > 1e-12 * std::max(smax, 1.0)) ++rank;
    }
    svd.setThreshold(1e-12 * std::max(smax, 1.0) / std::max(smax, 1e-300));
    rep.identity = false;
    rep.y0 = svd.solve(b);
    rep.Z = svd.matrixV().rightCols(ny - rank);
    if ((A * rep.y0 - b).cwiseAbs().maxCoeff() > options.tol_feasibility * (1.0 + b.cwiseAbs().maxCoeff())) {
      report.status = SolverStatus::Infeasible;
      return report;
    }
  }

  int iters = 0;
  const Barrier phase2(model, rep, false);
  Derivs probe;

  // Strictly feasible starting point: scaled identity, slack above every row.
  auto with_slack = [&](RealVector y) -> std::optional<RealVector> {
    if (model.t_index()) {
      double worst = -std::numeric_limits<double>::infinity();
      for (const auto& row : model.rows()) {
        for (const auto& l : row.logs) {
          if (!(l.g.eval(y) > 0)) return std::nullopt;
        }
        worst = std::max(worst, model.row_value(row, y));
      }
      y(*model.t_index()) = worst + 1.0;
    }
    return y;
  };

  std::optional<RealVector> u0;
  if (rep.identity) {
    double c = 1.0;
    for (int k = 0; k < 60 && !u0; ++k, c *= 0.5) {
      auto y = with_slack(model.pack_identity(c));
      if (y && phase2.evaluate(*y, 1.0, false, probe)) u0 = y;
    }
  }

  if (!u0) {
    // Phase 1: minimize sigma s.t. h_i <= sigma, X_hat + sigma I >= 0.
    const Barrier phase1(model, rep, true);
    const Eigen::Index nw = rep.free_dim(ny);
    RealVector u = RealVector::Zero(nw + 1);
    if (rep.identity) u.head(ny) = model.pack_identity(1.0);
    const RealVector y = phase1.y_of(u);
    double sigma = 0.0;
    for (const auto& h : model.ineq()) sigma = std::max(sigma, h.eval(y));
    for (std::size_t bi = 0; bi < model.blocks().size(); ++bi) {
      const ComplexMatrix X = model.block_hat(bi, y);
      Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(X, Eigen::EigenvaluesOnly);
      sigma = std::max(sigma, -es.eigenvalues()(0));
    }
    u(nw) = sigma + 1.0;
    auto feasible = [&](const RealVector& uu) { return uu(uu.size() - 1) < 0.0; };
    double tau = 1.0;
    const double m1 = static_cast<double>(model.ineq().size()) +
                      [&] { double s = 0; for (const auto& b : model.blocks()) s += b.dim; return s; }();
    bool found = false;
    for (;;) {
      const CenterResult cr = center(phase1, u, tau, iters, options.max_iter, options.log, 1, options.tol_stationarity, feasible);
      if (cr.early || feasible(u)) {
        found = true;
        break;
      }
      if (!cr.ok) break;
      if (m1 / tau < options.tol_feasibility) break;
      tau *= options.barrier_growth;
    }
    report.iterations = iters;
    if (!found) {
      report.status = iters >= options.max_iter ? SolverStatus::MaxIter : SolverStatus::Infeasible;
      if (report.status == SolverStatus::Infeasible) return report;
      report.X = model.unscale(phase1.y_of(u));
      return report;
    }
    RealVector uw = u.head(nw);
    auto y1 = with_slack(rep.to_y(uw));
    if (!y1 || !phase2.evaluate(rep.identity ? *y1 : uw, 1.0, false, probe)) {
      // Objective logs undefined at every interior point found.
      report.status = SolverStatus::Infeasible;
      return report;
    }
    if (rep.identity) {
      u0 = y1;
    } else {
      // t is a free coordinate; move it along the null space to the slack value.
      const RealVector dy = *y1 - rep.to_y(uw);
      uw += rep.Z.transpose() * dy;
      u0 = uw;
    }
  }

  RealVector u = *u0;
  const double m = model.degree();
  double tau = 1.0;
  bool done = false;
  for (;;) {
    const CenterResult cr =
        center(phase2, u, tau, iters, options.max_iter, options.log, 2, options.tol_stationarity, [](const RealVector&) { return false; });
    report.stage_objectives.push_back(model.objective(rep.to_y(u)));
    if (!cr.ok) break;
    if (m / tau <= options.tol_gap) {
      done = true;
      break;
    }
    tau *= options.barrier_growth;
  }

  const RealVector y = rep.to_y(u);
  Derivs d;
  phase2.evaluate(u, tau, true, d);
  const double decrement2 = std::max(0.0, -d.grad.dot(newton_direction(d, model)));
  report.iterations = iters;
  report.X = model.unscale(y);
  report.t = model.t_index() ? y(*model.t_index()) : 0.0;
  report.objective = model.objective(y);
  report.duality_gap = m / tau;
  report.stationarity = decrement2 / tau;
  report.kkt_residual = std::max(report.duality_gap, report.stationarity);

  double viol = 0.0;
  for (const auto& h : model.ineq()) viol = std::max(viol, h.eval(y));
  for (const auto& h : model.eq()) viol = std::max(viol, std::abs(h.eval(y)));
  for (const auto& row : model.rows()) viol = std::max(viol, model.row_value(row, y) - report.t);
  for (const auto& X : report.X) viol = std::max(viol, -min_eigenvalue(X));
  report.constraint_violation = viol;

  if (done && report.stationarity <= options.tol_stationarity &&
      viol <= options.tol_feasibility) {
    report.status = SolverStatus::Converged;
  }
  return report;
}

}  // namespace irssec
