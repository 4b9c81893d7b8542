#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "irssec/channel.hpp"
#include "irssec/cvxsolver.hpp"

namespace irssec {

struct Baseline {
  bool an = true;
  bool irs = true;

  friend bool operator==(const Baseline&, const Baseline&) = default;
};

/// "an_irs", "an_noirs", "noan_irs" or "noan_noirs".
std::string label(const Baseline& b);
Baseline parse_baseline_label(const std::string& label);
/// Command-line form: "an,irs", "an", "irs" or "none".
Baseline parse_baseline_flag(const std::string& flag);
/// (AN, IRS), (AN, No-IRS), (No-AN, IRS), (No-AN, No-IRS).
std::vector<Baseline> all_baselines();

struct ScenarioConfig {
  int M = 4;
  int N = 8;
  int K = 3;
  double p_max_dbm = 40.0;
  double noise_dbm = -105.0;
  Setup setup = Setup::A;

  /// Node positions; `geometry.eves` is used only when `explicit_eves`.
  NodeGeometry geometry;
  bool explicit_eves = false;

  /// Link parameters. The Rose-Eve link follows the setup unless
  /// `re_override` is set.
  ChannelParams params = ChannelParams::defaults(Setup::A);
  bool re_override = false;
  /// When false, the URA uses the largest row count <= params.ura_rows that
  /// divides N (5 rows whenever 5 | N).
  bool ura_rows_override = false;

  double epsilon = 1e-3;
  int max_outer = 40;
  std::vector<std::uint64_t> seeds;
  std::vector<Baseline> baselines = all_baselines();

  int n_rand = 200;
  double inner_tol = 1e-4;
  int inner_max_iter = 30;
  int refine_sweeps = 2;
  SolverOptions solver;
  /// Worker threads for sweeps; 0 picks the hardware concurrency.
  int threads = 0;

  /// Full-size scenario: (M, N, K) = (4, 20, 5).
  static ScenarioConfig paper_scale();

  double p_max_watts() const;
  double gamma0() const;
  /// Channel parameters with the setup-dependent Rose-Eve default applied.
  ChannelParams channel_params() const;
  ChannelScenario scenario() const;
  void set_setup(Setup s);
  void validate() const;

  /// Canonical JSON text (sorted keys, round-trip numbers).
  std::string to_json() const;
  /// FNV-1a of to_json().
  std::uint64_t hash() const;
};

/// Applies the keys of a JSON document on top of `base`. Unknown keys,
/// wrong types and out-of-range values raise InvalidInput.
ScenarioConfig parse_config(const std::string& text, const ScenarioConfig& base = {});
ScenarioConfig load_config(const std::string& path, const ScenarioConfig& base = {});

}  // namespace irssec
