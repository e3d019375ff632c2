// SPDX-License-Identifier: Apache-2.0
#include "risgee/scenario.hpp"

#include <cmath>
#include <numbers>

namespace risgee::scenario {

double distance(const Point3& a, const Point3& b) {
  return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

Geometry place_nodes(const ScenarioConfig& cfg, Rng& rng) {
  const auto& geo = cfg.geometry;
  if (!(geo.area_radius_m > 0.0)) throw InvalidInput("place_nodes: area radius must be > 0");
  Geometry out;
  out.ris = {0.0, 0.0, geo.ris_height_m};
  out.bs = {geo.bs_distance_m, 0.0, geo.bs_height_m};
  out.users.reserve(cfg.users);
  for (int k = 0; k < cfg.users; ++k) {
    const double radius = geo.area_radius_m * std::sqrt(rng.uniform());
    const double angle = 2.0 * std::numbers::pi * rng.uniform();
    const double height = geo.user_height_max_m * rng.uniform();
    out.users.push_back({radius * std::cos(angle), radius * std::sin(angle), height});
  }
  return out;
}

double pathloss_gain(double d_m, double eta, double d_ref_m, bool* clamped) {
  if (!(d_ref_m > 0.0)) throw InvalidInput("pathloss_gain: reference distance must be > 0");
  const bool below = !(d_m >= d_ref_m);
  if (clamped) *clamped = below;
  const double d = below ? d_ref_m : d_m;
  return std::pow(d / d_ref_m, -eta);
}

CMat rician_matrix(int rows, int cols, double k_factor, Rng& rng) {
  if (!(k_factor >= 0.0)) throw InvalidInput("rician_matrix: K factor must be >= 0");
  const double los = std::sqrt(k_factor / (k_factor + 1.0));
  const double nlos = std::sqrt(1.0 / (k_factor + 1.0));
  CMat h(rows, cols);
  // Column-major fill: LOS phase then scattering, entry by entry.
  for (int c = 0; c < cols; ++c) {
    for (int r = 0; r < rows; ++r) {
      const Complex l = rng.unit_phase();
      const Complex s = rng.complex_normal();
      h(r, c) = los * l + nlos * s;
    }
  }
  return h;
}

double noise_power(double psd_dbm_hz, double nf_db, double bandwidth_hz) {
  if (!(bandwidth_hz > 0.0)) throw InvalidInput("noise_power: bandwidth must be > 0");
  return std::pow(10.0, (psd_dbm_hz + nf_db) / 10.0) * 1e-3 * bandwidth_hz;
}

ChannelSet draw_channels(const ScenarioConfig& cfg, const Geometry& geometry, Rng& rng,
                         std::vector<std::string>* warnings) {
  auto amplitude = [&](const Point3& a, const Point3& b, const char* link) {
    bool clamped = false;
    const double gain =
        cfg.ref_gain * pathloss_gain(distance(a, b), cfg.pathloss_exponent, cfg.ref_distance_m,
                                     &clamped);
    if (clamped && warnings) {
      warnings->push_back(std::string(link) + " distance below the reference distance; clamped");
    }
    return std::sqrt(gain);
  };
  CMat g = amplitude(geometry.ris, geometry.bs, "RIS-BS") *
           rician_matrix(cfg.bs_antennas, cfg.ris_elements, cfg.rice_k_ris_bs, rng);
  std::vector<CVec> h;
  h.reserve(geometry.users.size());
  for (const auto& u : geometry.users) {
    const double amp = amplitude(u, geometry.ris, "user-RIS");
    h.push_back(amp * rician_matrix(cfg.ris_elements, 1, cfg.rice_k_user_ris, rng).col(0));
  }
  return ChannelSet::from(std::move(h), std::move(g));
}

Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t draw) {
  cfg.validate();
  Scenario out;
  const std::uint64_t key = Rng::derive(cfg.seed, draw);
  Rng rng(key);
  out.geometry = place_nodes(cfg, rng);
  out.realization.channels = draw_channels(cfg, out.geometry, rng, &out.warnings);
  out.realization.seed = cfg.seed;
  out.realization.draw = draw;
  return out;
}

}  // namespace risgee::scenario
