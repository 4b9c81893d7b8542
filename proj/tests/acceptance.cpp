// Acceptance run: one PASS/FAIL line per criterion. Exit status is non-zero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "irssec/harness.hpp"
#include "oracles.hpp"

using namespace irssec;
using namespace irssec::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Every algorithm run together with its power budget, for the extraction
// checks of criterion 10.
struct BudgetedRun {
  RunRecord rec;
  double p_max;
};
std::vector<BudgetedRun> g_runs;

// Unit-modulus entries of optimize_reflect outputs outside Algorithm 2.
std::vector<ReflectVector> g_reflect_outputs;
std::vector<double> g_reflect_excess_ratio;

std::string fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double log_grid_point(int i, int n, double lo_exp, double hi_exp) {
  return std::pow(10.0, lo_exp + (hi_exp - lo_exp) * i / (n - 1));
}

// 1. phi(t) = -t x + ln t + 1 peaks at t = 1/x with value -ln x.
Outcome log_bound_tightness() {
  std::mt19937_64 gen(1001);
  double worst_closed = 0.0, worst_grid = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < 1000; ++i) {
    const double x = std::pow(10.0, uniform(-3.0, 3.0, gen));
    auto phi = [x](double t) { return -t * x + std::log(t) + 1.0; };
    const double best = phi(1.0 / x);
    worst_closed = std::max(worst_closed, std::abs(best + std::log(x)));
    for (int k = 0; k < 10000; ++k) worst_grid = std::max(worst_grid, phi(log_grid_point(k, 10000, -4.0, 4.0)) - best);
  }
  Outcome o;
  o.pass = worst_closed <= 1e-10 && worst_grid <= 1e-8;
  o.detail = "max |phi(1/x) + ln x| = " + fmt("%.2e", worst_closed) + ", max grid excess = " + fmt("%.2e", worst_grid);
  return o;
}

// 2. Closed-form t and z updates against a 10^4-point log grid.
Outcome closed_form_updates() {
  std::mt19937_64 gen(1002);
  double worst = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < 100; ++it) {
    const int M = 3, N = 4, K = 2;
    const ChannelSet ch = random_channels(M, N, K, gen);
    const double g0 = std::pow(10.0, uniform(-1, 2, gen));
    const ComplexVector f1 = random_vector(M, gen) * uniform(0.1, 2.0, gen);
    const ComplexVector f2 = random_vector(M, gen) * uniform(0.0, 1.0, gen);
    RealVector theta(N);
    for (auto& t : theta) t = uniform(0, 2 * std::numbers::pi, gen);
    const ReflectVector v = ReflectVector::from_phases(theta);

    const EffectiveChannels eff = effective_channels(ch, v.extended());
    const HermitianMatrix F1 = HermitianMatrix::outer(f1), F2 = HermitianMatrix::outer(f2);
    const TxSlacks t = update_t(F1, F2, eff, g0);

    const ReflectForms forms = effective_vectors(ch, f1, f2);
    const HermitianMatrix V = HermitianMatrix::outer(v.extended());
    const ReflectSlacks z = update_z(V, forms, g0);

    const double tb = phi_b(F1, F2, t.t_b, eff, g0);
    const double zb = psi_b(V, z.z_b, forms, g0);
    for (int i = 0; i < 10000; ++i) {
      const double s = log_grid_point(i, 10000, -8.0, 8.0);
      worst = std::max(worst, phi_b(F1, F2, s, eff, g0) - tb);
      worst = std::max(worst, psi_b(V, s, forms, g0) - zb);
      for (int k = 0; k < K; ++k) {
        worst = std::max(worst, phi_e(F1, F2, t.t_e[k], eff.H_e[k], g0) - phi_e(F1, F2, s, eff.H_e[k], g0));
        worst = std::max(worst, psi_e(V, z.z_e[k], forms.Hbar_e[k], forms.Hhat_e[k], g0) -
                                    psi_e(V, s, forms.Hbar_e[k], forms.Hhat_e[k], g0));
      }
    }
  }
  Outcome o;
  o.pass = worst <= 1e-8;
  o.detail = "max grid advantage over closed form = " + fmt("%.2e", worst);
  return o;
}

// 3. Interior-point optimum against dense grids on tiny programs.
Outcome solver_oracle() {
  std::mt19937_64 gen(1003);
  double worst = 0.0, worst_kkt = 0.0;
  int not_converged = 0;
  auto check = [&](Eigen::Index dim, int n_rows) {
    const double budget = uniform(0.5, 4.0, gen);
    const int n_logs = 1 + static_cast<int>(gen() % 3);
    const LogTraceProgram p = random_program(dim, n_logs, n_rows, budget, gen);
    const SolverReport r = solve(p);
    if (r.status != SolverStatus::Converged) {
      ++not_converged;
      return;
    }
    worst_kkt = std::max(worst_kkt, r.kkt_residual);
    worst = std::max(worst, std::abs(r.objective - grid_optimum(p, budget)));
  };
  for (int i = 0; i < 200; ++i) check(1, static_cast<int>(i % 3));
  for (int i = 0; i < 50; ++i) check(2, static_cast<int>(i % 3));
  Outcome o;
  o.pass = worst <= 1e-3 && worst_kkt <= 1e-7 && not_converged == 0;
  o.detail = "max |solver - grid| = " + fmt("%.2e", worst) + ", max KKT residual = " + fmt("%.2e", worst_kkt) +
             ", not converged = " + std::to_string(not_converged);
  return o;
}

// 4. Inner and outer traces over 50 seeded desk-scale runs.
Outcome inner_monotonicity() {
  ScenarioConfig cfg;  // M = 4, N = 8, K = 3, epsilon = 1e-3, L = 40
  double worst_inner = 0.0, worst_outer = 0.0;
  int eps_stops = 0;
  bool eps_ok = true;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const ChannelSet ch = build_scenario(cfg.scenario(), ChannelRng(seed));
    RunRecord r = algorithm2(cfg, ch, Baseline{true, true}, seed);
    for (const auto* traces : {&r.tx_traces, &r.reflect_traces}) {
      for (const auto& tr : *traces) {
        for (std::size_t i = 1; i < tr.size(); ++i) worst_inner = std::max(worst_inner, tr[i - 1] - tr[i]);
      }
    }
    double prev = r.initial_objective;
    for (double x : r.trace) {
      worst_outer = std::max(worst_outer, prev - x);
      prev = x;
    }
    if (r.stopped_by_epsilon) {
      ++eps_stops;
      if (r.trace.size() >= 2) {
        const double a = r.trace[r.trace.size() - 2], b = r.trace.back();
        eps_ok = eps_ok && (b - a) <= cfg.epsilon * std::max(std::abs(a), std::abs(b));
      }
    }
    eps_ok = eps_ok && static_cast<int>(r.trace.size()) <= cfg.max_outer;
    g_runs.push_back({std::move(r), cfg.p_max_watts()});
  }
  Outcome o;
  o.pass = worst_inner <= 1e-7 && worst_outer <= 1e-6 && eps_ok;
  o.detail = "max inner decrease = " + fmt("%.2e", worst_inner) + ", max outer decrease = " + fmt("%.2e", worst_outer) +
             ", epsilon stops = " + std::to_string(eps_stops) + "/50";
  return o;
}

// 5. Single antenna, one eavesdropper, no IRS: 1-D power-split oracle.
Outcome scalar_ground_truth() {
  std::mt19937_64 gen(1005);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const ChannelSet ch = random_channels(1, 1, 1, gen);
    const double P = std::pow(10.0, uniform(-1, 2, gen));
    const double g0 = std::pow(10.0, uniform(-1, 1, gen));
    const double gb = ch.h_ab.squaredNorm(), ge = ch.h_ae[0].squaredNorm();
    const double oracle = grid_max_1d(
                              [&](double rho) {
                                const double p1 = rho * P, p2 = (1 - rho) * P;
                                return std::log2(1 + g0 * gb * p1 / (g0 * gb * p2 + 1)) -
                                       std::log2(1 + g0 * ge * p1 / (g0 * ge * p2 + 1));
                              },
                              0.0, 1.0)
                              .value;
    auto rng = ChannelRng(i).substream(1);
    RunRecord r = algorithm2(ch, P, g0, Baseline{true, false}, AlgorithmSettings{}, rng);
    worst = std::max(worst, std::abs(r.rate_raw - oracle));
    g_runs.push_back({std::move(r), P});
  }
  Outcome o;
  o.pass = worst <= 1e-3;
  o.detail = "max |rate - oracle| = " + fmt("%.2e", worst) + " bps/Hz";
  return o;
}

// 6. One reflecting element, one eavesdropper, fixed transmit vectors.
Outcome single_phase_ground_truth() {
  std::mt19937_64 gen(1006);
  double worst = 0.0;
  for (int i = 0; i < 20; ++i) {
    const int M = 2;
    const ChannelSet ch = random_channels(M, 1, 1, gen);
    const double g0 = std::pow(10.0, uniform(-1, 1.5, gen));
    TxSolution tx{random_vector(M, gen), random_vector(M, gen) * uniform(0.0, 0.8, gen)};
    double oracle = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
      RealVector th(1);
      th << 2 * std::numbers::pi * k / 10000.0;
      oracle = std::max(oracle, secrecy_objective(ch, tx, ReflectVector::from_phases(th), g0).raw);
    }
    auto rng = ChannelRng(i).substream(2);
    const ReflectResult r = optimize_reflect(ch, tx, g0, ReflectOptions{}, rng);
    worst = std::max(worst, std::abs(r.recovered_objective - oracle));
    g_reflect_outputs.push_back(r.v);
    g_reflect_excess_ratio.push_back((r.recovered_objective - r.relaxed_objective) /
                                     (ReflectOptions{}.tol * std::max(std::abs(r.relaxed_objective), 1e-9)));
  }
  Outcome o;
  o.pass = worst <= 1e-3;
  o.detail = "max |rate - oracle| = " + fmt("%.2e", worst) + " bps/Hz";
  return o;
}

void keep_runs(SweepOutput& out, const ScenarioConfig& cfg, Axis axis, const std::vector<double>& values) {
  // Runs are ordered by value, then baseline, then seed.
  const std::size_t per_value = out.runs.size() / values.size();
  for (std::size_t i = 0; i < out.runs.size(); ++i) {
    const ScenarioConfig c = apply_axis(cfg, axis, values[i / per_value]);
    g_runs.push_back({std::move(out.runs[i]), c.p_max_watts()});
  }
}

double cell_mean(const SweepOutput& out, double value, const std::string& baseline) {
  for (const auto& c : out.cells) {
    if (c.value == value && c.baseline == baseline) return c.mean_rate;
  }
  return std::nan("");
}

std::string failures_note(const SweepOutput& out) {
  return out.failures.empty() ? "" : ", failed trials = " + std::to_string(out.failures.size());
}

// 7. Transmit-power trend at desk scale.
Outcome power_trend() {
  ScenarioConfig cfg;
  cfg.baselines = {Baseline{true, true}, Baseline{false, true}};
  const std::vector<double> values{50.0, 60.0};
  SweepOutput out = sweep(cfg, Axis::PMax, values, 10, 1);
  const double an50 = cell_mean(out, 50, "an_irs"), no50 = cell_mean(out, 50, "noan_irs");
  const double no60 = cell_mean(out, 60, "noan_irs");
  const double growth = (no60 - no50) / no50;
  Outcome o;
  o.pass = out.failures.empty() && an50 - no50 > 0 && growth < 0.05;
  o.detail = "AN-IRS@50 = " + fmt("%.4f", an50) + ", NoAN-IRS@50 = " + fmt("%.4f", no50) +
             ", NoAN-IRS@60 = " + fmt("%.4f", no60) + ", growth 50->60 = " + fmt("%.1f", 100 * growth) + "%" +
             failures_note(out);
  keep_runs(out, cfg, Axis::PMax, values);
  return o;
}

// 8. AN gain versus the number of eavesdroppers, (M, N, P) = (4, 20, 40 dBm).
Outcome eve_count_trend() {
  ScenarioConfig cfg = ScenarioConfig::paper_scale();
  cfg.baselines = {Baseline{true, true}, Baseline{false, true}};
  const std::vector<double> values{1.0, 8.0};
  SweepOutput out = sweep(cfg, Axis::K, values, 10, 1);
  const double gap1 = cell_mean(out, 1, "an_irs") - cell_mean(out, 1, "noan_irs");
  const double gap8 = cell_mean(out, 8, "an_irs") - cell_mean(out, 8, "noan_irs");
  Outcome o;
  o.pass = out.failures.empty() && gap8 > gap1 && gap1 <= 0.05;
  o.detail = "AN gain K=1 = " + fmt("%.4f", gap1) + ", K=8 = " + fmt("%.4f", gap8) + failures_note(out);
  keep_runs(out, cfg, Axis::K, values);
  return o;
}

// 9. AN gain versus the number of reflecting elements in both setups,
// (M, K, P) = (4, 5, 40 dBm).
Outcome element_count_trend() {
  const std::vector<double> values{5.0, 20.0};
  double gain[2][2];
  std::string note;
  bool ok = true;
  for (int s = 0; s < 2; ++s) {
    ScenarioConfig cfg = ScenarioConfig::paper_scale();
    cfg.set_setup(s == 0 ? Setup::A : Setup::B);
    cfg.baselines = {Baseline{true, true}, Baseline{false, true}};
    SweepOutput out = sweep(cfg, Axis::N, values, 10, 1);
    ok = ok && out.failures.empty();
    note += failures_note(out);
    for (int i = 0; i < 2; ++i) gain[s][i] = cell_mean(out, values[i], "an_irs") - cell_mean(out, values[i], "noan_irs");
    keep_runs(out, cfg, Axis::N, values);
  }
  const bool a_ok = gain[0][1] < gain[0][0];
  const bool b_ok = std::abs(gain[1][1] - gain[1][0]) <= 0.3 * std::abs(gain[1][0]);
  Outcome o;
  o.pass = ok && a_ok && b_ok;
  o.detail = "setup a gain N=5 = " + fmt("%.4f", gain[0][0]) + ", N=20 = " + fmt("%.4f", gain[0][1]) +
             "; setup b gain N=5 = " + fmt("%.4f", gain[1][0]) + ", N=20 = " + fmt("%.4f", gain[1][1]) + " (" +
             fmt("%+.1f", 100 * (gain[1][1] - gain[1][0]) / gain[1][0]) + "%)" + note;
  return o;
}

// 10. Feasibility of every output produced above.
Outcome extraction_validity() {
  // |v_n| is evaluated in floating point; a few ulps is the exact-arithmetic
  // unit circle.
  const double modulus_tol = 4 * std::numeric_limits<double>::epsilon();
  double worst_mod = 0.0, worst_power = -std::numeric_limits<double>::infinity();
  double worst_excess = -std::numeric_limits<double>::infinity();
  std::size_t checked = 0;
  auto modulus = [&](const ReflectVector& v) {
    for (Eigen::Index n = 0; n < v.size(); ++n) worst_mod = std::max(worst_mod, std::abs(std::abs(v.v()(n)) - 1.0));
  };
  for (const auto& [rec, p_max] : g_runs) {
    modulus(rec.v);
    worst_power = std::max(worst_power, (rec.tx.power() - p_max) / p_max);
    worst_excess = std::max(worst_excess, rec.max_recovery_excess_ratio);
    ++checked;
  }
  for (const auto& v : g_reflect_outputs) modulus(v);
  for (double r : g_reflect_excess_ratio) worst_excess = std::max(worst_excess, r);
  checked += g_reflect_outputs.size();
  Outcome o;
  o.pass = checked > 0 && worst_mod <= modulus_tol && worst_power <= 1e-8 && worst_excess <= 1.0;
  o.detail = std::to_string(checked) + " outputs, max ||v_n| - 1| = " + fmt("%.1e", worst_mod) +
             ", max relative power excess = " + fmt("%.1e", worst_power) +
             ", max recovered-over-relaxed / tolerance = " + fmt("%.2f", worst_excess);
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "log bound tightness", 1.0, log_bound_tightness},
      {2, "closed-form slack updates", 10.0, closed_form_updates},
      {3, "solver oracle equivalence", 120.0, solver_oracle},
      {4, "inner and outer monotonicity", 600.0, inner_monotonicity},
      {5, "scalar ground truth", 60.0, scalar_ground_truth},
      {6, "single-phase ground truth", 120.0, single_phase_ground_truth},
      {7, "transmit-power trend", 1200.0, power_trend},
      {8, "eavesdropper-count trend", 1200.0, eve_count_trend},
      {9, "element-count trend", 1800.0, element_count_trend},
      {10, "extraction validity", std::numeric_limits<double>::infinity(), extraction_validity},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.limit_seconds;
    const bool pass = o.pass && in_time;
    if (!pass) ++failed;
    std::string limit = std::isinf(c.limit_seconds) ? "" : fmt(" < %.0f s", c.limit_seconds);
    std::printf("%s criterion %d (%s): %s; runtime %.2f s%s%s\n", pass ? "PASS" : "FAIL", c.id, c.name,
                o.detail.c_str(), secs, limit.c_str(), in_time ? "" : " EXCEEDED");
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
