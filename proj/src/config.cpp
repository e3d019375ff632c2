// SPDX-License-Identifier: Apache-2.0
#include "risgee/config.hpp"

#include <cmath>
#include <string>

namespace risgee {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidInput("invalid configuration: " + what);
}

bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void ScenarioConfig::validate() const {
  require(users >= 1, "users must be >= 1");
  require(bs_antennas >= 1, "bs_antennas must be >= 1");
  require(ris_elements >= 1, "ris_elements must be >= 1");
  require(std::isfinite(bandwidth_hz) && bandwidth_hz > 0.0, "bandwidth must be > 0");
  require(p_max_w.size() == users, "p_max must have one entry per user");
  require(mu.size() == users, "mu must have one entry per user");
  for (int k = 0; k < users; ++k) {
    require(finite_nonneg(p_max_w(k)), "p_max entries must be >= 0");
    require(std::isfinite(mu(k)) && mu(k) >= 1.0, "mu entries must be >= 1");
  }
  require(finite_nonneg(p0_w), "p0 must be >= 0");
  require(finite_nonneg(p0_ris_w), "p0_ris must be >= 0");
  require(finite_nonneg(pcn_w), "pcn must be >= 0");
  require(finite_nonneg(pr_max_w), "pr_max must be >= 0");
  require(finite_nonneg(passive_pcn_w), "passive_pcn must be >= 0");
  require(finite_nonneg(passive_p0_ris_w), "passive_p0_ris must be >= 0");
  require(std::isfinite(sigma2_w) && sigma2_w > 0.0, "receiver noise power must be > 0");
  require(finite_nonneg(sigma2_ris_w), "RIS noise power must be >= 0");
  require(std::isfinite(pathloss_exponent) && pathloss_exponent > 0.0,
          "pathloss exponent must be > 0");
  require(std::isfinite(ref_distance_m) && ref_distance_m > 0.0, "reference distance must be > 0");
  require(std::isfinite(ref_gain) && ref_gain > 0.0, "reference gain must be > 0");
  require(finite_nonneg(rice_k_ris_bs) && finite_nonneg(rice_k_user_ris),
          "Rician factors must be >= 0");
  require(geometry.area_radius_m > 0.0, "area radius must be > 0");
  require(geometry.user_height_max_m >= 0.0, "user height range must be >= 0");
}

ScenarioConfig default_config() {
  ScenarioConfig cfg;
  set_uniform_users(cfg, 4, 1.0, 1.0);
  // -174 dBm/Hz PSD, 10 dB noise figure over 20 MHz.
  cfg.sigma2_w = std::pow(10.0, (-174.0 + 10.0) / 10.0) * 1e-3 * cfg.bandwidth_hz;
  cfg.sigma2_ris_w = cfg.sigma2_w;
  return cfg;
}

ScenarioConfig passive_variant(const ScenarioConfig& cfg) {
  ScenarioConfig out = cfg;
  out.pr_max_w = 0.0;
  out.sigma2_ris_w = 0.0;
  out.pcn_w = cfg.passive_pcn_w;
  out.p0_ris_w = cfg.passive_p0_ris_w;
  return out;
}

ScenarioConfig sum_rate_variant(const ScenarioConfig& cfg) {
  ScenarioConfig out = cfg;
  out.mu.setZero();
  return out;
}

void set_uniform_users(ScenarioConfig& cfg, int users, double p_max_w, double mu) {
  cfg.users = users;
  cfg.p_max_w = RVec::Constant(users, p_max_w);
  cfg.mu = RVec::Constant(users, mu);
}

}  // namespace risgee
