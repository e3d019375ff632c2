// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "risgee/common.hpp"
#include "risgee/config.hpp"
#include "risgee/model.hpp"
#include "risgee/rng.hpp"

namespace risgee::scenario {

struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
};

double distance(const Point3& a, const Point3& b);

struct Geometry {
  std::vector<Point3> users;
  Point3 ris;
  Point3 bs;
};

/// Channels plus the key and draw index that produced them.
struct ChannelRealization {
  ChannelSet channels;
  std::uint64_t seed = 0;
  std::uint64_t draw = 0;
};

struct Scenario {
  Geometry geometry;
  ChannelRealization realization;
  std::vector<std::string> warnings;
};

/// Users area-uniform in the disc of radius `area_radius_m` around the RIS
/// (radius R sqrt(u)), heights uniform in [0, user_height_max_m].
Geometry place_nodes(const ScenarioConfig& cfg, Rng& rng);

/// (d / d_ref)^-eta. Distances below d_ref are clamped to d_ref and `clamped`
/// is set when provided.
double pathloss_gain(double d_m, double eta, double d_ref_m = 1.0, bool* clamped = nullptr);

/// sqrt(K/(K+1)) H_los + sqrt(1/(K+1)) H_nlos with unit-modulus random-phase
/// H_los and unit-variance circular Gaussian H_nlos. Throws InvalidInput for K < 0.
CMat rician_matrix(int rows, int cols, double k_factor, Rng& rng);

/// 10^((psd + nf)/10) mW/Hz times the bandwidth, in watts.
double noise_power(double psd_dbm_hz, double nf_db, double bandwidth_hz);

/// Channels for a given placement: G from RIS to BS with factor K_t, h_k from
/// each user to the RIS with factor K_r, both scaled by the path-loss amplitude.
ChannelSet draw_channels(const ScenarioConfig& cfg, const Geometry& geometry, Rng& rng,
                         std::vector<std::string>* warnings = nullptr);

/// Placement and channels for draw `draw` of the stream keyed by cfg.seed.
Scenario build_scenario(const ScenarioConfig& cfg, std::uint64_t draw = 0);

}  // namespace risgee::scenario
