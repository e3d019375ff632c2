// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "risgee/common.hpp"

namespace risgee {

/// Node placement parameters. The RIS sits above the origin; the BS sits
/// `bs_distance_m` away along +x.
struct GeometryConfig {
  double area_radius_m = 100.0;
  double bs_distance_m = 50.0;
  double ris_height_m = 15.0;
  double bs_height_m = 10.0;
  double user_height_max_m = 5.0;
};

/// Physical and system constants, all in SI units (watts, hertz, meters).
/// dB-valued quantities are converted once, at ingestion.
struct ScenarioConfig {
  int users = 4;         // K
  int bs_antennas = 4;   // N_R
  int ris_elements = 100;  // N

  double bandwidth_hz = 20e6;
  RVec p_max_w;  // per-user transmit budget, length K
  RVec mu;       // amplifier inefficiency, length K, each >= 1

  double p0_w = 10.0;       // BS static power
  double p0_ris_w = 1.0;    // active RIS static power
  double pcn_w = 1e-3;      // per active element static power
  double pr_max_w = 10.0;   // RIS amplification budget

  // Passive-RIS static power model (used by the passive specialization and
  // by the uniform/random baseline).
  double passive_pcn_w = 1e-3;
  double passive_p0_ris_w = 0.1;

  double sigma2_w = 0.0;      // receiver noise power
  double sigma2_ris_w = 0.0;  // RIS amplifier noise power

  GeometryConfig geometry;
  double pathloss_exponent = 4.0;
  double ref_distance_m = 1.0;
  double ref_gain = 1.0;  // linear gain at the reference distance
  double rice_k_ris_bs = 4.0;    // K_t
  double rice_k_user_ris = 2.0;  // K_r

  std::uint64_t seed = 1;

  /// P_c = P_0 + N P_{c,n} + P_{0,RIS}.
  double static_power_w() const { return p0_w + ris_elements * pcn_w + p0_ris_w; }

  /// Throws InvalidInput on the first violated invariant.
  void validate() const;
};

/// Full-scale defaults (K = N_R = 4, N = 100, 20 MHz, ...).
ScenarioConfig default_config();

/// Same constants with the passive static-power model, P_R,max = 0 and no
/// amplifier noise.
ScenarioConfig passive_variant(const ScenarioConfig& cfg);

/// Copy with every mu_k set to zero (sum-rate specialization).
ScenarioConfig sum_rate_variant(const ScenarioConfig& cfg);

/// Resize per-user vectors after changing `users`, filling with `p_max_w` and `mu`.
void set_uniform_users(ScenarioConfig& cfg, int users, double p_max_w, double mu);

}  // namespace risgee
