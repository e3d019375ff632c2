// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "risgee/common.hpp"
#include "risgee/config.hpp"
#include "risgee/model.hpp"
#include "risgee/rng.hpp"

namespace risgee::solvers {

enum class Method { kAlternating, kEmbeddedMmse };

/// "method1" / "method2".
std::string method_name(Method m);

struct SolverOptions {
  // Outer loop stops when GEE / bandwidth (bits/J/Hz) changes by less than this.
  double tol_outer = 1e-6;
  // Sequential surrogate loops stop on a relative change of the surrogate ratio below this.
  double tol_sequential = 1e-7;
  double tol_dinkelbach = 1e-9;
  double tol_inner = 1e-10;
  int max_outer = 50;
  int max_sequential = 50;
  int max_dinkelbach = 30;
  int max_ascent = 300;
  double armijo = 1e-4;
  double backtrack = 0.5;
  // Stride doublings tried along each surrogate step (0 disables).
  int max_extrapolation = 40;
  int randomization_samples = 200;
  double rank_tol = 1e-8;
  std::uint64_t seed = 0x5eed;

  /// Throws InvalidInput on nonpositive tolerances or iteration limits.
  void validate() const;
};

/// Constraint audit of an allocation, in watts unless noted.
struct ConstraintResiduals {
  double box = 0.0;        // max violation of 0 <= p_k <= P_max,k
  double band_low = 0.0;   // max(0, tr R - gamma^H R gamma)
  double band_high = 0.0;  // max(0, gamma^H R gamma - tr R - P_R,max)
  double unit_modulus = 0.0;  // max_n ||gamma_n| - 1| (informational for active runs)
  double psd_min_eig = 0.0;   // smallest eigenvalue of the last lifted iterate (method 2)
  double rank_ratio = 0.0;    // lambda_2 / lambda_1 of the last lifted iterate (method 2)

  double worst() const;
};

ConstraintResiduals audit(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

struct StageTimes {
  double gamma_s = 0.0;
  double power_s = 0.0;
  double filter_s = 0.0;
  double total_s = 0.0;
};

struct SolveReport {
  std::string method;
  std::vector<double> gee_trajectory;  // bits/J, initial point first
  Allocation allocation;
  GeeBreakdown final;
  ConstraintResiduals residuals;
  int outer_iterations = 0;  // I
  int gamma_iterations = 0;  // I_gamma, summed over outer iterations
  int power_iterations = 0;  // I_p, summed over outer iterations
  StageTimes times;
  bool converged = false;
  std::vector<std::string> warnings;
  // Sum-rate mode only: GEE of the final allocation under the true mu.
  double post_hoc_gee = 0.0;
};

/// gamma = all ones, p = P_max / 2, MMSE filters.
Allocation default_init(const ChannelSet& ch, const ScenarioConfig& cfg);

struct ExtractionInfo {
  bool rank_one = false;
  double rank_ratio = 0.0;
  int best_index = -1;  // -1: principal eigenvector, otherwise sample index
  double best_value = 0.0;
};

/// Recovers a feasible gamma from a lifted solution X. A numerically unit-rank
/// X (lambda_2 / lambda_1 <= rank_tol) gives sqrt(lambda_1) v_1. Otherwise the
/// principal eigenvector and `samples` draws from CN(0, X) are rescaled into
/// tr R <= gamma^H R gamma <= P_R,max + tr R and the one maximizing `objective`
/// is returned; ties go to the earliest candidate.
CVec rank_one_extract(const CMat& x, const RVec& r_diag, double pr_max,
                      const std::function<double(const CVec&)>& objective, int samples,
                      Rng& rng, double rank_tol = 1e-8, ExtractionInfo* info = nullptr);

/// Alternating gamma / p / filter updates with the filters held fixed in the
/// gamma and p subproblems.
SolveReport method1_solve(const ChannelSet& ch, const ScenarioConfig& cfg, const Allocation& init,
                          const SolverOptions& opts);

/// Alternating gamma / p updates on the GEE with MMSE filters substituted in,
/// the gamma step through the lifted semidefinite relaxation.
SolveReport method2_solve(const ChannelSet& ch, const ScenarioConfig& cfg, const Allocation& init,
                          const SolverOptions& opts);

SolveReport solve(Method method, const ChannelSet& ch, const ScenarioConfig& cfg,
                  const Allocation& init, const SolverOptions& opts);

/// Passive surface: P_R,max = 0, unit-modulus gamma, the passive static-power
/// constants of `cfg`. Phases are updated by ascent on the unit-modulus torus.
SolveReport passive_solve(const ChannelSet& ch, const ScenarioConfig& cfg, Method method,
                          const SolverOptions& opts);

/// Same drivers with mu = 0. `final` and `post_hoc_gee` are evaluated with the
/// true mu of `cfg`; the trajectory is the mu = 0 objective.
SolveReport sum_rate_mode(const ChannelSet& ch, const ScenarioConfig& cfg, Method method,
                          const SolverOptions& opts);

}  // namespace risgee::solvers
