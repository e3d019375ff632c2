// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "risgee/config.hpp"
#include "risgee/model.hpp"
#include "risgee/rng.hpp"
#include "risgee/solvers.hpp"

// Monte-Carlo experiment runner: P_max sweeps, active/passive P_c,n sweeps,
// convergence-time tables, and their CSV / JSON artifacts.

namespace risgee::harness {

enum class MethodId {
  kMethod1Gee,
  kMethod2Gee,
  kMethod1Sr,
  kMethod2Sr,
  kUniformRandom,
  kPassiveMethod1,
  kPassiveMethod2,
};

/// "method1-gee", "method2-gee", "method1-sr", "method2-sr", "uniform-random",
/// "passive-method1", "passive-method2".
std::string method_id_name(MethodId m);

/// Throws ConfigError on an unknown name.
MethodId parse_method(const std::string& name);

/// Comma-separated list, duplicates rejected. Throws ConfigError.
std::vector<MethodId> parse_method_list(const std::string& list);

/// Problem size and trial count of a named profile.
struct Profile {
  std::string name;
  int ris_elements = 16;
  int users = 2;
  int bs_antennas = 2;
  int trials = 20;
  std::vector<double> pmax_grid_dbw;
  std::vector<double> pcn_grid_dbm;
  std::vector<int> pcn_ris_sizes;
  std::vector<double> timing_grid_dbw;
};

/// "desk" (N = 16, K = N_R = 2) or "paper" (N = 100, K = N_R = 4). Throws ConfigError.
Profile profile(const std::string& name);

/// Overlays the profile sizes onto a configuration document.
nlohmann::json apply_profile(const nlohmann::json& doc, const Profile& prof);

enum class SweepVariable { kPmaxDbw, kPcnDbm };

std::string sweep_variable_name(SweepVariable v);

struct ExperimentSpec {
  std::string experiment = "pmax-sweep";
  SweepVariable variable = SweepVariable::kPmaxDbw;
  std::vector<double> grid;
  std::vector<MethodId> methods;
  int trials = 1;
  // RIS sizes visited by the P_c,n sweep; empty means the base size only.
  std::vector<int> ris_sizes;
  // Configuration document the base config was built from (kept for the sidecar).
  nlohmann::json config_document = nlohmann::json::object();
  ScenarioConfig base;
  solvers::SolverOptions options;
  // Keep the trajectory of trial 0 for every cell.
  bool keep_trajectories = false;

  /// Throws ConfigError on an empty grid or method set, or trials < 1.
  void validate() const;
};

struct TrialOutcome {
  double gee_bits_per_joule = 0.0;
  double sum_rate_bps = 0.0;
  int outer_iterations = 0;
  double seconds = 0.0;
  bool converged = true;
  bool failed = false;
  std::string error;
  std::vector<double> trajectory;
};

/// One (grid point, RIS size, method) cell aggregated over trials. Failed
/// trials are excluded from the means and counted in `failures`.
struct CellStats {
  double grid_value = 0.0;
  int ris_elements = 0;
  MethodId method = MethodId::kMethod2Gee;
  int trials = 0;
  int failures = 0;
  int unconverged = 0;
  double mean_gee = 0.0;
  double median_gee = 0.0;
  double mean_sum_rate = 0.0;
  double mean_iterations = 0.0;
  double mean_seconds = 0.0;
  double median_seconds = 0.0;
  std::vector<double> trajectory;  // trial 0, when requested
};

struct SweepResult {
  SweepVariable variable = SweepVariable::kPmaxDbw;
  std::vector<CellStats> cells;
  std::string fingerprint;
  int attempted = 0;
  int failures = 0;

  double failure_rate() const;
  /// Throws std::out_of_range when the cell does not exist.
  const CellStats& cell(double grid_value, int ris_elements, MethodId method) const;
};

/// Case (e): p_k = P_max,k, unit-modulus gamma with i.i.d. uniform phases,
/// MMSE filters, GEE under the passive power model.
GeeBreakdown run_baseline_e(const ChannelSet& ch, const ScenarioConfig& cfg, Rng& rng);

/// Runs one method on one channel draw. Solver exceptions are caught and
/// reported in the outcome. `trial_key` seeds the baseline phases.
TrialOutcome run_trial(MethodId method, const ChannelSet& ch, const ScenarioConfig& cfg,
                       const solvers::SolverOptions& opts, std::uint64_t trial_key);

/// Paired sweep: every method sees the same channel draw for a given trial index.
SweepResult sweep_pmax(const ExperimentSpec& spec);

/// Same over the P_c,n grid, once per RIS size.
SweepResult sweep_pcn(const ExperimentSpec& spec);

/// First grid interval where the passive mean GEE exceeds the active one.
struct Crossover {
  int ris_elements = 0;
  bool found = false;
  bool below_grid = false;  // passive already better at the first grid point
  double lo = 0.0;
  double hi = 0.0;
  double estimate = 0.0;  // linear interpolation of the GEE difference
};

std::vector<Crossover> find_crossovers(const SweepResult& result, MethodId active,
                                       MethodId passive);

struct TimingRow {
  double p_max_dbw = 0.0;
  double t1a = 0.0;  // median seconds, method 1, active
  double t1p = 0.0;
  double t2a = 0.0;
  double t2p = 0.0;

  double r1a_1p() const { return t1a / t1p; }
  double r2a_2p() const { return t2a / t2p; }
  double r2p_1p() const { return t2p / t1p; }
  double r2a_1a() const { return t2a / t1a; }
};

struct TimingTable {
  std::vector<TimingRow> rows;
  double spearman_1a_1p = 0.0;  // rank correlation of T1a/T1p with P_max
  SweepResult raw;
};

/// Median convergence times of both methods, active and passive, over the
/// spec's P_max grid. The method list of `spec` is ignored.
TimingTable timing_table(const ExperimentSpec& spec);

/// Spearman rank correlation with average ranks for ties. Throws InvalidInput
/// on size mismatch or fewer than two points.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

/// Result CSV (no wall-clock columns, so reruns are byte-identical).
std::string results_csv(const SweepResult& result);

/// Parses the output of results_csv. Throws InvalidInput on malformed input.
std::vector<CellStats> parse_results_csv(const std::string& text);

std::string timing_csv(const SweepResult& result);

std::string timing_table_csv(const TimingTable& table);

/// JSON sidecar: configuration, solver options, seed, generator, build version.
nlohmann::json sidecar(const SweepResult& result, const ExperimentSpec& spec);

/// Writes <stem>.csv, <stem>_timing.csv and <stem>.json into `dir` (created if
/// missing), plus <stem>_trajectory.csv when trajectories were kept. Returns
/// the paths written. Throws std::runtime_error naming the path on I/O errors.
std::vector<std::string> emit_results(const SweepResult& result, const ExperimentSpec& spec,
                                      const std::string& dir, const std::string& stem);

/// Build version string baked in at configure time.
std::string build_version();

}  // namespace risgee::harness
