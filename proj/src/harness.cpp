#include "irssec/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "irssec/error.hpp"

namespace irssec {

AlgorithmSettings AlgorithmSettings::from(const ScenarioConfig& cfg) {
  AlgorithmSettings s;
  s.epsilon = cfg.epsilon;
  s.max_outer = cfg.max_outer;
  s.tx.tol = cfg.inner_tol;
  s.tx.max_iter = cfg.inner_max_iter;
  s.tx.n_rand = cfg.n_rand;
  s.tx.solver = cfg.solver;
  s.reflect.tol = cfg.inner_tol;
  s.reflect.max_iter = cfg.inner_max_iter;
  s.reflect.n_rand = cfg.n_rand;
  s.reflect.refine_sweeps = cfg.refine_sweeps;
  s.reflect.solver = cfg.solver;
  return s;
}

namespace {

void note_block(RunRecord& rec, double relaxed, double recovered, double tol) {
  rec.max_relaxation_gap = std::max(rec.max_relaxation_gap, relaxed - recovered);
  rec.max_recovery_excess = std::max(rec.max_recovery_excess, recovered - relaxed);
  rec.max_recovery_excess_ratio =
      std::max(rec.max_recovery_excess_ratio, (recovered - relaxed) / (tol * std::max(std::abs(relaxed), 1e-9)));
}

}  // namespace

RunRecord algorithm2(const ChannelSet& ch, double p_max, double gamma0, const Baseline& baseline,
                     const AlgorithmSettings& settings, std::mt19937_64& rng,
                     const std::optional<AlgorithmStart>& start) {
  if (!(settings.epsilon > 0) || settings.max_outer < 1) throw InvalidInput("algorithm2: bad stopping rule");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::Index M = ch.antennas();
  const Eigen::Index N = ch.elements();

  RunRecord rec;
  rec.baseline = baseline;
  TxOptions tx_opt = settings.tx;
  tx_opt.allow_jamming = baseline.an;

  // Initializer: cascade alignment against direct-link MRT, then the
  // transmit split on the resulting effective channel.
  ComplexVector mrt = ComplexVector::Zero(M);
  if (ch.h_ab.norm() > 0) mrt = ch.h_ab.normalized() * std::sqrt(p_max);
  ReflectVector v = baseline.irs ? initial_reflect(ch, mrt) : ReflectVector::ones(N);
  auto extended = [&](const ReflectVector& r) { return baseline.irs ? r.extended() : direct_only_extended(N); };
  TxSolution tx;
  if (start) {
    if (start->tx.f1.size() != M || start->tx.f2.size() != M || start->v.size() != N) {
      throw InvalidInput("algorithm2: start has the wrong dimensions");
    }
    v = start->v;
    tx = start->tx;
    if (!baseline.an) tx.f2.setZero();
  } else {
    tx = initial_tx(effective_channels(ch, extended(v)), p_max, baseline.an, rng);
  }
  auto rate = [&](const TxSolution& t, const ReflectVector& r) {
    return secrecy_objective(ch, t.f1, t.f2, extended(r), gamma0).raw;
  };

  double best = rate(tx, v);
  rec.initial_objective = best;
  double prev = best;
  for (int m = 1; m <= settings.max_outer; ++m) {
    const TxResult tr = optimize_tx(ch, extended(v), p_max, gamma0, tx_opt, rng, tx);
    rec.stats.merge(tr.stats);
    rec.tx_traces.push_back(tr.trace);
    note_block(rec, tr.relaxed_objective, tr.recovered_objective, tx_opt.tol);
    if (tr.recovered_objective >= best) {
      best = tr.recovered_objective;
      tx = tr.tx;
    }

    if (baseline.irs) {
      const ReflectResult rr = optimize_reflect(ch, tx, gamma0, settings.reflect, rng, v);
      rec.stats.merge(rr.stats);
      rec.reflect_traces.push_back(rr.trace);
      rec.extraction_fallback = rec.extraction_fallback || rr.fallback;
      if (rr.iterations > 0) note_block(rec, rr.relaxed_objective, rr.recovered_objective, settings.reflect.tol);
      if (rr.recovered_objective >= best) {
        best = rr.recovered_objective;
        v = rr.v;
      }
    }

    rec.trace.push_back(best);
    const double change = best - prev;
    const double scale = std::max(std::abs(prev), std::abs(best));
    prev = best;
    if (std::isinf(settings.epsilon) || change <= settings.epsilon * scale) {
      rec.stopped_by_epsilon = true;
      break;
    }
  }

  rec.tx = tx;
  rec.v = v;
  const SecrecyValue final_value = secrecy_objective(ch, tx.f1, tx.f2, extended(v), gamma0);
  rec.rate_raw = final_value.raw;
  rec.rate_clamped = final_value.clamped;
  rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

namespace {

constexpr std::uint64_t kAlgorithmStreamBase = 1000;

std::uint64_t baseline_stream(const Baseline& b) {
  return kAlgorithmStreamBase + (b.an ? 2 : 0) + (b.irs ? 1 : 0);
}

}  // namespace

RunRecord algorithm2(const ScenarioConfig& cfg, const ChannelSet& ch, const Baseline& baseline,
                     std::uint64_t seed) {
  // The alternation finds local optima, and the AN and No-AN runs of one
  // channel often land in different ones. Each baseline is therefore also
  // started from the other's solution: No-AN from the AN beam with the
  // jamming dropped, then AN from the resulting No-AN point. The start is
  // part of the incumbent, so AN never ends below No-AN.
  const AlgorithmSettings settings = AlgorithmSettings::from(cfg);
  const double p_max = cfg.p_max_watts();
  auto run = [&](const Baseline& b, const std::optional<AlgorithmStart>& start) {
    auto rng = ChannelRng(seed).substream(baseline_stream(b) + (start ? 4 : 0));
    return algorithm2(ch, p_max, cfg.gamma0(), b, settings, rng, start);
  };
  SolveStats total;
  double seconds = 0.0;
  bool fallback = false;
  auto account = [&](const RunRecord& r) {
    total.merge(r.stats);
    seconds += r.wall_seconds;
    fallback = fallback || r.extraction_fallback;
  };
  auto better = [&](RunRecord best, RunRecord other, const char* label) {
    if (other.rate_raw > best.rate_raw) {
      best = std::move(other);
      best.start = label;
    }
    return best;
  };

  const Baseline an{true, baseline.irs}, noan{false, baseline.irs};
  const RunRecord an_plain = run(an, std::nullopt);
  account(an_plain);
  RunRecord noan_plain = run(noan, std::nullopt);
  account(noan_plain);
  TxSolution beam = an_plain.tx;
  beam.f2.setZero();
  if (beam.f1.squaredNorm() > 0) beam.f1 *= std::sqrt(p_max / beam.f1.squaredNorm());
  RunRecord noan_cross = run(noan, AlgorithmStart{beam, an_plain.v});
  account(noan_cross);
  RunRecord rec = better(std::move(noan_plain), std::move(noan_cross), "an");
  if (baseline.an) {
    RunRecord an_cross = run(an, AlgorithmStart{rec.tx, rec.v});
    account(an_cross);
    rec = better(an_plain, std::move(an_cross), "no_an");
  }
  rec.stats = total;
  rec.wall_seconds = seconds;
  rec.extraction_fallback = fallback;
  rec.config_hash = cfg.hash();
  rec.seed = seed;
  return rec;
}

Axis parse_axis(const std::string& s) {
  if (s == "pmax") return Axis::PMax;
  if (s == "k") return Axis::K;
  if (s == "n") return Axis::N;
  throw InvalidInput("axis must be pmax, k or n (got '" + s + "')");
}

std::string to_string(Axis a) {
  switch (a) {
    case Axis::PMax: return "pmax";
    case Axis::K: return "k";
    case Axis::N: return "n";
  }
  return "?";
}

ScenarioConfig apply_axis(const ScenarioConfig& cfg, Axis axis, double value) {
  ScenarioConfig c = cfg;
  auto count = [&](const char* name) {
    if (!(value >= 1) || value != std::floor(value) || value > 1e6) {
      throw InvalidInput(std::string(name) + " values must be positive integers");
    }
    return static_cast<int>(value);
  };
  switch (axis) {
    case Axis::PMax: c.p_max_dbm = value; break;
    case Axis::K:
      if (c.explicit_eves) throw InvalidInput("cannot sweep K with an explicit eavesdropper list");
      c.K = count("K");
      break;
    case Axis::N: c.N = count("N"); break;
  }
  c.validate();
  return c;
}

std::vector<std::uint64_t> trial_seeds(const ScenarioConfig& cfg, int trials, std::uint64_t base_seed) {
  if (trials < 1) throw InvalidInput("trials must be >= 1");
  std::vector<std::uint64_t> out;
  if (!cfg.seeds.empty()) {
    if (static_cast<std::size_t>(trials) > cfg.seeds.size()) {
      throw InvalidInput("more trials requested than seeds listed in the config");
    }
    out.assign(cfg.seeds.begin(), cfg.seeds.begin() + trials);
  } else {
    for (int i = 0; i < trials; ++i) out.push_back(base_seed + static_cast<std::uint64_t>(i));
  }
  return out;
}

SweepOutput sweep(const ScenarioConfig& cfg, Axis axis, const std::vector<double>& values, int trials,
                  std::uint64_t base_seed, std::ostream* progress) {
  if (cfg.baselines.empty()) throw InvalidInput("sweep: baseline set is empty");
  if (values.empty()) throw InvalidInput("sweep: no axis values");
  std::vector<ScenarioConfig> configs;
  for (double v : values) configs.push_back(apply_axis(cfg, axis, v));
  const std::vector<std::uint64_t> seeds = trial_seeds(cfg, trials, base_seed);
  const std::size_t nv = values.size(), ns = seeds.size(), nb = cfg.baselines.size();

  struct Slot {
    std::optional<RunRecord> rec;
    std::string error;
  };
  std::vector<Slot> slots(nv * ns * nb);
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;

  auto worker = [&] {
    for (std::size_t job; (job = next.fetch_add(1)) < nv * ns;) {
      const std::size_t vi = job / ns, si = job % ns;
      const ScenarioConfig& c = configs[vi];
      std::optional<ChannelSet> ch;
      std::string channel_error;
      try {
        ch = build_scenario(c.scenario(), ChannelRng(seeds[si]));
      } catch (const std::exception& e) {
        channel_error = e.what();
      }
      for (std::size_t bi = 0; bi < nb; ++bi) {
        Slot& slot = slots[(vi * nb + bi) * ns + si];
        if (!ch) {
          slot.error = channel_error;
          continue;
        }
        try {
          RunRecord r = algorithm2(c, *ch, c.baselines[bi], seeds[si]);
          if (!std::isfinite(r.rate_raw)) throw std::runtime_error("non-finite secrecy rate");
          slot.rec = std::move(r);
        } catch (const std::exception& e) {
          slot.error = e.what();
        }
        if (progress) {
          std::lock_guard<std::mutex> lock(log_mutex);
          *progress << to_string(axis) << "=" << format_double(values[vi]) << " seed=" << seeds[si]
                    << " baseline=" << label(c.baselines[bi]);
          if (slot.rec) {
            *progress << " rate=" << slot.rec->rate_clamped << " outer=" << slot.rec->trace.size()
                      << " time=" << slot.rec->wall_seconds << "s\n";
          } else {
            *progress << " FAILED: " << slot.error << "\n";
          }
        }
      }
    }
  };
  unsigned n_threads = cfg.threads > 0 ? static_cast<unsigned>(cfg.threads) : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(nv * ns)));
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  SweepOutput out;
  for (std::size_t vi = 0; vi < nv; ++vi) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      SweepCell cell;
      cell.axis = axis;
      cell.value = values[vi];
      cell.baseline = label(cfg.baselines[bi]);
      cell.setup = cfg.setup;
      std::vector<double> rates;
      for (std::size_t si = 0; si < ns; ++si) {
        Slot& slot = slots[(vi * nb + bi) * ns + si];
        if (slot.rec) {
          rates.push_back(slot.rec->rate_clamped);
          out.runs.push_back(std::move(*slot.rec));
        } else {
          out.failures.push_back(to_string(axis) + "=" + format_double(values[vi]) + " seed=" +
                                 std::to_string(seeds[si]) + " baseline=" + cell.baseline + ": " + slot.error);
        }
      }
      cell.trials_ok = static_cast<int>(rates.size());
      cell.trials_failed = static_cast<int>(ns - rates.size());
      if (rates.empty()) {
        cell.mean_rate = std::nan("");
        cell.stderr_rate = std::nan("");
      } else {
        double sum = 0.0;
        for (double r : rates) sum += r;
        cell.mean_rate = sum / static_cast<double>(rates.size());
        double ss = 0.0;
        for (double r : rates) ss += (r - cell.mean_rate) * (r - cell.mean_rate);
        cell.stderr_rate = rates.size() > 1
                               ? std::sqrt(ss / static_cast<double>(rates.size() - 1) / static_cast<double>(rates.size()))
                               : 0.0;
      }
      out.cells.push_back(cell);
    }
  }
  return out;
}

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

constexpr const char* kHeader = "axis,value,baseline,setup,mean_rate_bps_hz,stderr,trials_ok,trials_failed";

double parse_double(const std::string& s, const std::string& path) {
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("'" + path + "': bad number '" + s + "'");
  }
  return x;
}

int parse_int(const std::string& s, const std::string& path) {
  int x = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw std::runtime_error("'" + path + "': bad integer '" + s + "'");
  }
  return x;
}

}  // namespace

void emit_csv(const std::vector<SweepCell>& cells, const std::string& path) {
  if (cells.empty()) throw InvalidInput("emit_csv: empty table");
  std::ostringstream os;
  os << kHeader << '\n';
  for (const auto& c : cells) {
    os << to_string(c.axis) << ',' << format_double(c.value) << ',' << c.baseline << ',' << to_string(c.setup) << ','
       << format_double(c.mean_rate) << ',' << format_double(c.stderr_rate) << ',' << c.trials_ok << ','
       << c.trials_failed << '\n';
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  out << os.str();
  out.flush();
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

std::vector<SweepCell> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw std::runtime_error("'" + path + "': unexpected header");
  std::vector<SweepCell> cells;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string item; std::getline(ss, item, ',');) f.push_back(item);
    if (f.size() != 8) throw std::runtime_error("'" + path + "': expected 8 fields in '" + line + "'");
    SweepCell c;
    c.axis = parse_axis(f[0]);
    c.value = parse_double(f[1], path);
    c.baseline = label(parse_baseline_label(f[2]));
    c.setup = parse_setup(f[3]);
    c.mean_rate = parse_double(f[4], path);
    c.stderr_rate = parse_double(f[5], path);
    c.trials_ok = parse_int(f[6], path);
    c.trials_failed = parse_int(f[7], path);
    cells.push_back(std::move(c));
  }
  return cells;
}

void emit_traces(const std::vector<RunRecord>& runs, const std::string& path) {
  using nlohmann::json;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open '" + path + "' for writing");
  auto finite = [](double x) { return std::isfinite(x) ? json(x) : json(nullptr); };
  for (const auto& r : runs) {
    json trace = json::array();
    for (double x : r.trace) trace.push_back(finite(x));
    json j = {{"config_hash", r.config_hash},
              {"seed", r.seed},
              {"baseline", label(r.baseline)},
              {"initial_objective", finite(r.initial_objective)},
              {"trace", trace},
              {"stopped_by_epsilon", r.stopped_by_epsilon},
              {"rate_raw", finite(r.rate_raw)},
              {"rate_clamped", finite(r.rate_clamped)},
              {"max_relaxation_gap", finite(r.max_relaxation_gap)},
              {"extraction_fallback", r.extraction_fallback},
              {"solves", r.stats.solves},
              {"newton_iterations", r.stats.newton_iterations},
              {"solves_not_converged", r.stats.not_converged},
              {"worst_kkt", finite(r.stats.worst_kkt)},
              {"wall_seconds", r.wall_seconds}};
    out << j.dump() << '\n';
  }
  if (!out) throw std::runtime_error("write to '" + path + "' failed");
}

}  // namespace irssec
