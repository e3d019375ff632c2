// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "risgee/common.hpp"
#include "risgee/config.hpp"
#include "risgee/model.hpp"

// Tight concave minorizers used by the sequential programs. Every rate is in
// bits; wherever a natural-log derivative appears the 1/ln2 factor is explicit.

namespace risgee::surrogates {

/// Lower bound on log2(1 + x/y) that is tight at (xbar, ybar):
///   log2(1 + xbar/ybar) + (xbar/ybar)(2 sqrt(x/xbar) - (x+y)/(xbar+ybar) - 1) / ln2.
double log_bound(double x, double y, double xbar, double ybar);

/// Per-user constants frozen at an expansion point gamma_bar, for fixed
/// filters and powers.
struct SurrogateCoeffs {
  RVec l_bar;      // effective interference-plus-noise at gamma_bar, L_k
  RVec a_bar;      // rate at gamma_bar (bits), A_k
  RVec b_bar;      // SINR at gamma_bar, B_k
  RVec d_bar;      // 2 / |c_k^H A_k gamma_bar|
  RVec e_bar;      // 1 / (L_k + p_k |c_k^H A_k gamma_bar|^2)
  RVec f_bar;      // E_k sigma^2 ||c_k||^2 + 1
  std::vector<RVec> u_tilde;  // diag(|G^H c_k|^2)
  // v[k][m] = A_m^H c_k, so that c_k^H A_m gamma = v[k][m]^H gamma.
  std::vector<std::vector<CVec>> v;
  CVec signal_bar;  // c_k^H A_k gamma_bar
  CVec gamma_bar;
  RVec p;
  double sigma2_ris = 0.0;
};

/// Freezes the coefficients at gamma_bar. When |c_k^H A_k gamma_bar| < 1e-12
/// for some user, throws SurrogateDegenerate; use `perturb_expansion_point`.
SurrogateCoeffs build_gamma_coeffs(const CVec& gamma_bar, const RVec& p,
                                   const std::vector<CVec>& filters, const ChannelSet& ch,
                                   const ScenarioConfig& cfg);

/// gamma_bar + 1e-9 * e_1 when some |c_k^H A_k gamma_bar| is below 1e-12,
/// gamma_bar otherwise.
CVec perturb_expansion_point(const CVec& gamma_bar, const RVec& p,
                             const std::vector<CVec>& filters, const ChannelSet& ch);

/// Per-user values of the concave rate surrogate R~_k(gamma).
RVec gamma_rate_surrogate(const CVec& gamma, const SurrogateCoeffs& coeffs);

/// sum_k R~_k(gamma) written as c0 + Re{b^H gamma} - gamma^H Q gamma, Q PSD.
struct ConcaveQuadratic {
  double c0 = 0.0;
  CVec b;
  CMat q;

  double value(const CVec& x) const;
  /// Ascent direction 2 d/d(conj x): b - 2 Q x.
  CVec gradient(const CVec& x) const;
};

ConcaveQuadratic gamma_sum_surrogate(const SurrogateCoeffs& coeffs);

/// First-order lower bound of gamma^H R gamma around gamma_bar.
double linearized_active_constraint(const CVec& gamma, const CVec& gamma_bar, const RVec& r_diag);

/// Constants of the power subproblem at fixed (gamma, filters).
struct PowerSurrogateCoeffs {
  RMat a;    // a(k, m) = |c_k^H A_m gamma|^2
  RVec d;    // c_k^H W c_k
  // Total power is slope^T p + offset. slope_k = mu_k - ||h_k||^2 + ||H_k gamma||^2
  // (mu_k - ||h_k||^2 plus the p-dependent part of tr(R gamma gamma^H)).
  RVec slope;
  double offset = 0.0;  // sigma_RIS^2 (||gamma||^2 - N) + P_c
  // RF power is rf_slope^T p + rf_offset; must stay within [0, P_R,max].
  RVec rf_slope;
  double rf_offset = 0.0;
};

PowerSurrogateCoeffs build_power_coeffs(const CVec& gamma, const std::vector<CVec>& filters,
                                        const ChannelSet& ch, const ScenarioConfig& cfg);

/// Sum-rate (bits/s/Hz) at fixed filters as a function of p.
double power_sum_rate(const RVec& p, const PowerSurrogateCoeffs& coeffs);
/// power_sum_rate / (slope^T p + offset).
double power_gee(const RVec& p, const PowerSurrogateCoeffs& coeffs);

/// Concave numerator: sum_k log2(d_k + sum_m p_m a_km) minus the first-order
/// expansion of sum_k log2(d_k + sum_{m!=k} p_m a_km) around pbar.
double power_dc_numerator(const RVec& p, const RVec& pbar, const PowerSurrogateCoeffs& coeffs);
RVec power_dc_numerator_gradient(const RVec& p, const RVec& pbar,
                                 const PowerSurrogateCoeffs& coeffs);
/// power_dc_numerator / (slope^T p + offset).
double power_dc_surrogate(const RVec& p, const RVec& pbar, const PowerSurrogateCoeffs& coeffs);

// ---- lifted (X = gamma gamma^H) MMSE sum-rate ----

/// G1(X) = sum_k log2 det(sigma^2 I + sigma_RIS^2 G diag(X) G^H + sum_m p_m A_m X A_m^H).
double g1_x(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg);
/// G2(X) = sum_k log2 det(sigma^2 I + sigma_RIS^2 G diag(X) G^H + sum_{m!=k} p_m A_m X A_m^H).
double g2_x(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg);
/// SR_MMSE(X) = G1(X) - G2(X).
double sum_rate_mmse_x(const CMat& x, const RVec& p, const ChannelSet& ch,
                       const ScenarioConfig& cfg);

/// Gradients (Hermitian, with 1/ln2) so that dG = Re tr(grad^H dX).
CMat grad_g1(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg);
CMat grad_g2(const CMat& x, const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg);

/// Linearization of G2 at xbar, reusable across many evaluations of the surrogate.
struct G2Linearization {
  CMat xbar;
  double value = 0.0;
  CMat gradient;
};
G2Linearization linearize_g2(const CMat& xbar, const RVec& p, const ChannelSet& ch,
                             const ScenarioConfig& cfg);

/// G1(X) - G2(Xbar) - Re tr(grad G2(Xbar)^H (X - Xbar)). Throws InvalidInput
/// for non-Hermitian arguments.
double sr_mmse_surrogate_x(const CMat& x, const CMat& xbar, const RVec& p,
                           const ChannelSet& ch, const ScenarioConfig& cfg);
double sr_mmse_surrogate_x(const CMat& x, const G2Linearization& lin, const RVec& p,
                           const ChannelSet& ch, const ScenarioConfig& cfg);

// ---- power domain with MMSE filters ----

/// F(p) = sum_k log2 det(W + sum_{m!=k} p_m A_m gamma gamma^H A_m^H).
double f_power(const RVec& p, const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg);
/// dF/dp_i = (1/ln2) sum_{k!=i} (A_i gamma)^H T_k^{-1} (A_i gamma).
RVec grad_f_power(const RVec& p, const CVec& gamma, const ChannelSet& ch,
                  const ScenarioConfig& cfg);
/// K log2 det(W + sum_m p_m A_m gamma gamma^H A_m^H), the concave first term.
double h_power(const RVec& p, const CVec& gamma, const ChannelSet& ch, const ScenarioConfig& cfg);
RVec grad_h_power(const RVec& p, const CVec& gamma, const ChannelSet& ch,
                  const ScenarioConfig& cfg);

/// Throws InvalidInput unless `m` is square and Hermitian to 1e-9 relative.
void require_hermitian(const CMat& m, const char* what);

}  // namespace risgee::surrogates
