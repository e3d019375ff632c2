// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "risgee/common.hpp"

// Euclidean projections onto the feasible sets of the subproblems.

namespace risgee::solvers {

/// Componentwise clamp onto [0, p_max].
RVec project_box(const RVec& p, const RVec& p_max);

/// Projection onto {0 <= p <= p_max} intersected with
/// {0 <= rf_slope^T p + rf_offset <= pr_max}, i.e. the power box plus the
/// active-regime band, which is linear in p for fixed gamma.
/// Throws InfeasibleSubproblem when the intersection is empty.
RVec project_power_feasible(const RVec& p, const RVec& p_max, const RVec& rf_slope,
                            double rf_offset, double pr_max);

/// Projection onto {x : sum_n r_n |x_n|^2 <= radius2} (diagonal weights r > 0).
CVec project_weighted_ball(const CVec& x, const RVec& r_diag, double radius2);

/// Projection onto {gamma^H R gamma <= pr_max + tr R} intersected with the
/// linearized active constraint 2 Re{gbar^H R gamma} - gbar^H R gbar >= tr R.
/// Uses a closed form when R is a multiple of the identity and Dykstra's
/// alternating projections otherwise. Throws InfeasibleSubproblem when the
/// intersection is empty (gamma_bar = 0, for instance).
CVec project_gamma_feasible(const CVec& gamma, const CVec& gamma_bar, const RVec& r_diag,
                            double pr_max);

/// Projection of a Hermitian matrix onto {X psd, lo <= tr(R X) <= hi}.
/// Uniform R is handled exactly through one eigendecomposition; otherwise
/// Dykstra alternates eigenvalue clipping and the affine slab projection.
CMat project_psd_trace_band(const CMat& x, const RVec& r_diag, double lo, double hi);

/// Per-element phase projection onto |gamma_n| = 1 (zero entries map to 1).
CVec project_unit_modulus(const CVec& gamma);

/// True when every entry of r equals r(0) to 1e-14 relative.
bool is_uniform(const RVec& r_diag);

}  // namespace risgee::solvers
