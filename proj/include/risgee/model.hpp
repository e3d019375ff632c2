// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "risgee/common.hpp"
#include "risgee/config.hpp"

namespace risgee {

/// Realized channels. `h[k]` is user k -> RIS (length N), `g` is RIS -> BS
/// (N_R x N) and `a[k] = g * diag(h[k])`.
struct ChannelSet {
  std::vector<CVec> h;
  CMat g;
  std::vector<CMat> a;

  /// Builds the cascaded matrices from h and G.
  static ChannelSet from(std::vector<CVec> h, CMat g);

  int users() const { return static_cast<int>(h.size()); }
  int elements() const { return static_cast<int>(g.cols()); }
  int antennas() const { return static_cast<int>(g.rows()); }

  /// Throws InvalidInput unless the dimensions agree with `cfg`.
  void check(const ScenarioConfig& cfg) const;
};

/// Optimization variables: RIS coefficients, transmit powers, receive filters.
struct Allocation {
  CVec gamma;
  RVec p;
  std::vector<CVec> filters;
};

struct GeeBreakdown {
  double sum_rate_bps = 0.0;
  double total_power_w = 0.0;
  double gee_bits_per_joule = 0.0;
  RVec sinr;
};

namespace model {

/// W = sigma^2 I + sigma_RIS^2 G diag(|gamma|^2) G^H.
CMat noise_covariance(const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg);

/// SINR of user k under arbitrary (nonzero) receive filter.
double sinr(int k, const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

/// All K SINR values.
RVec sinr_all(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

/// Diagonal of R = sum_k p_k diag(|h_k|^2) + sigma_RIS^2 I.
RVec matrix_r(const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg);

/// gamma^H R gamma - tr(R) with R given by its diagonal. Negative values mean
/// the surface is not in the active regime.
double rf_power(const CVec& gamma, const RVec& r_diag);

/// gamma^H R gamma.
double weighted_norm2(const CVec& gamma, const RVec& r_diag);

/// tr(R gamma gamma^H) - sigma_RIS^2 N + sum_k p_k (mu_k - ||h_k||^2) + P_c.
double total_power(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                   const ScenarioConfig& cfg);
double total_power(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

/// GEE with the allocation's own filters. Throws DegenerateConfig when the
/// total power is not positive.
GeeBreakdown gee(const Allocation& alloc, const ChannelSet& ch, const ScenarioConfig& cfg);

/// Linear MMSE filters c_k = sqrt(p_k) M_k^{-1} A_k gamma. For p_k = 0 the
/// sqrt(p_k) factor is dropped so the filter stays nonzero (SINR is
/// scale-invariant in c_k).
std::vector<CVec> mmse_filters(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                               const ScenarioConfig& cfg);

/// Sum-rate with MMSE filtering via log-determinants, bits/s/Hz.
double sum_rate_mmse(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                     const ScenarioConfig& cfg);

/// GEE after replacing the filters by the MMSE ones.
GeeBreakdown gee_mmse(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                      const ScenarioConfig& cfg);

/// log2 det of a Hermitian positive definite matrix. Throws NumericalError
/// if the Cholesky factorization fails.
double log2_det(const CMat& m);

}  // namespace model
}  // namespace risgee
