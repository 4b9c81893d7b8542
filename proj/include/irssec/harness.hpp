#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "irssec/channel.hpp"
#include "irssec/config.hpp"
#include "irssec/irsopt.hpp"
#include "irssec/secrecy.hpp"
#include "irssec/txopt.hpp"

namespace irssec {

struct AlgorithmSettings {
  double epsilon = 1e-3;
  int max_outer = 40;
  TxOptions tx;
  ReflectOptions reflect;

  static AlgorithmSettings from(const ScenarioConfig& cfg);
};

struct RunRecord {
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  Baseline baseline;

  /// Secrecy rate (bits/s/Hz) of the initializer and of the incumbent after
  /// each outer iteration.
  double initial_objective = 0.0;
  std::vector<double> trace;
  bool stopped_by_epsilon = false;

  TxSolution tx;
  ReflectVector v = ReflectVector::ones(0);
  double rate_raw = 0.0;
  double rate_clamped = 0.0;

  /// Relaxed block objectives per inner alternation step, one vector per
  /// block solve.
  std::vector<std::vector<double>> tx_traces;
  std::vector<std::vector<double>> reflect_traces;
  /// Largest (relaxed - recovered) and (recovered - relaxed) over all block
  /// solves, bits/s/Hz.
  double max_relaxation_gap = 0.0;
  double max_recovery_excess = -std::numeric_limits<double>::infinity();
  /// Same excess, normalized by the block's own stopping tolerance
  /// (tol * |relaxed|); at most 1 when recovery respects the bound.
  double max_recovery_excess_ratio = -std::numeric_limits<double>::infinity();
  bool extraction_fallback = false;

  /// Which start produced the result: "default", "an" (No-AN run started
  /// from the paired AN beam) or "no_an" (AN run started from the No-AN
  /// solution).
  std::string start = "default";

  SolveStats stats;
  double wall_seconds = 0.0;
};

struct AlgorithmStart {
  TxSolution tx;
  ReflectVector v;
};

/// Alternates the transmit and reflect blocks from the cascade-aligned
/// initializer. A block result replaces the incumbent only when its
/// secrecy rate does not decrease, so `trace` is non-decreasing. Stops when
/// the relative improvement is at most epsilon or after max_outer rounds.
/// Without IRS the reflect vector is pinned to the direct link; without AN
/// the jamming vector is pinned to zero.
RunRecord algorithm2(const ChannelSet& ch, double p_max, double gamma0, const Baseline& baseline,
                     const AlgorithmSettings& settings, std::mt19937_64& rng,
                     const std::optional<AlgorithmStart>& start = std::nullopt);

/// Configured run: channel realization `seed`, algorithm randomness from a
/// baseline-specific substream of the same seed. Each baseline is also run
/// from the paired solution of the other AN setting and keeps the better
/// result; AN baselines never fall below their No-AN counterpart.
RunRecord algorithm2(const ScenarioConfig& cfg, const ChannelSet& ch, const Baseline& baseline,
                     std::uint64_t seed);

enum class Axis { PMax, K, N };
Axis parse_axis(const std::string& s);
std::string to_string(Axis a);
/// Copy of `cfg` with the swept parameter set to `value`.
ScenarioConfig apply_axis(const ScenarioConfig& cfg, Axis axis, double value);

struct SweepCell {
  Axis axis = Axis::PMax;
  double value = 0.0;
  std::string baseline;
  Setup setup = Setup::A;
  double mean_rate = 0.0;
  double stderr_rate = 0.0;
  int trials_ok = 0;
  int trials_failed = 0;

  friend bool operator==(const SweepCell&, const SweepCell&) = default;
};

struct SweepOutput {
  std::vector<SweepCell> cells;
  /// Ordered by (value, baseline, seed); failed trials are absent.
  std::vector<RunRecord> runs;
  std::vector<std::string> failures;
};

/// Trial seeds: cfg.seeds (first `trials`) when given, otherwise
/// base_seed, base_seed + 1, ...
std::vector<std::uint64_t> trial_seeds(const ScenarioConfig& cfg, int trials, std::uint64_t base_seed);

/// Runs every configured baseline for each (value, seed) on shared channel
/// realizations. Cells are ordered by value, then baseline order in cfg.
SweepOutput sweep(const ScenarioConfig& cfg, Axis axis, const std::vector<double>& values, int trials,
                  std::uint64_t base_seed = 1, std::ostream* progress = nullptr);

/// Shortest representation that parses back to the same double.
std::string format_double(double x);

void emit_csv(const std::vector<SweepCell>& cells, const std::string& path);
std::vector<SweepCell> read_csv(const std::string& path);

/// One JSON object per run (trace, final rates, solver statistics).
void emit_traces(const std::vector<RunRecord>& runs, const std::string& path);

}  // namespace irssec
