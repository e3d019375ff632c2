// SPDX-License-Identifier: Apache-2.0
#include "risgee/projections.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

namespace risgee::solvers {

RVec project_box(const RVec& p, const RVec& p_max) {
  if (p.size() != p_max.size()) throw InvalidInput("project_box: size mismatch");
  return p.cwiseMax(0.0).cwiseMin(p_max);
}

namespace {

// Smallest/largest tau for which g(tau) crosses `target`, with g nonincreasing.
// Returns the end of the final bracket on the side where `feasible(g)` holds.
double bisect_monotone(const std::function<double(double)>& g, double target, double tau_ok,
                       double tau_bad, const std::function<bool(double)>& feasible) {
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (tau_ok + tau_bad);
    if (mid == tau_ok || mid == tau_bad) break;
    if (feasible(g(mid))) {
      tau_ok = mid;
    } else {
      tau_bad = mid;
    }
  }
  (void)target;
  return tau_ok;
}

}  // namespace

RVec project_power_feasible(const RVec& p, const RVec& p_max, const RVec& rf_slope,
                            double rf_offset, double pr_max) {
  if (p.size() != p_max.size() || p.size() != rf_slope.size()) {
    throw InvalidInput("project_power_feasible: size mismatch");
  }
  auto point = [&](double tau) { return project_box(p - tau * rf_slope, p_max); };
  auto band = [&](double tau) { return rf_slope.dot(point(tau)) + rf_offset; };
  const double scale =
      1.0 + std::abs(rf_offset) + pr_max + rf_slope.cwiseAbs().dot(p_max.cwiseAbs());
  const double eps = 1e-12 * scale;

  const double v0 = band(0.0);
  if (v0 >= -eps && v0 <= pr_max + eps) return point(0.0);

  const double a2 = rf_slope.squaredNorm();
  if (a2 == 0.0) {
    throw InfeasibleSubproblem("project_power_feasible: band unreachable (zero slope)");
  }
  const bool too_high = v0 > pr_max;
  const double target = too_high ? pr_max : 0.0;
  const double sign = too_high ? 1.0 : -1.0;
  auto feasible = [&](double v) { return too_high ? v <= pr_max : v >= 0.0; };

  double tau_bad = 0.0;
  double tau_ok = sign * std::abs(v0 - target) / a2;
  int expansions = 0;
  while (!feasible(band(tau_ok))) {
    tau_bad = tau_ok;
    tau_ok *= 2.0;
    if (++expansions > 2000 || !std::isfinite(tau_ok)) {
      throw InfeasibleSubproblem("project_power_feasible: box and RF band do not intersect");
    }
  }
  const double tau = bisect_monotone(band, target, tau_ok, tau_bad, feasible);
  return point(tau);
}

CVec project_weighted_ball(const CVec& x, const RVec& r_diag, double radius2) {
  if (x.size() != r_diag.size()) throw InvalidInput("project_weighted_ball: size mismatch");
  if (radius2 < 0.0) throw InfeasibleSubproblem("project_weighted_ball: negative radius");
  const RVec x2 = x.cwiseAbs2();
  const double v0 = r_diag.dot(x2);
  if (v0 <= radius2) return x;
  if (radius2 == 0.0) return CVec::Zero(x.size());
  // phi(nu) = sum r |x|^2 / (1 + nu r)^2 is convex and decreasing, so Newton
  // from nu = 0 increases monotonically towards the root.
  double nu = 0.0;
  for (int it = 0; it < 200; ++it) {
    const RVec denom = (1.0 + nu * r_diag.array()).matrix();
    const double phi = (r_diag.array() * x2.array() / denom.array().square()).sum();
    const double dphi =
        (-2.0 * r_diag.array().square() * x2.array() / denom.array().cube()).sum();
    const double step = (phi - radius2) / dphi;
    const double next = nu - step;
    if (!(next > nu) || std::abs(next - nu) <= 1e-16 * next) {
      nu = std::max(next, nu);
      break;
    }
    nu = next;
  }
  CVec out = (x.array() / (1.0 + nu * r_diag.array()).cast<Complex>()).matrix();
  const double v = r_diag.dot(out.cwiseAbs2());
  if (v > radius2) out *= std::sqrt(radius2 / v);
  return out;
}

bool is_uniform(const RVec& r_diag) {
  if (r_diag.size() == 0) return true;
  const double r0 = r_diag(0);
  return ((r_diag.array() - r0).abs() <= 1e-14 * std::abs(r0)).all();
}

namespace {

struct Halfspace {
  CVec a;    // Re{a^H x} >= c
  double c;
};

CVec project_halfspace(const CVec& x, const Halfspace& hs) {
  const double v = hs.a.dot(x).real();
  if (v >= hs.c) return x;
  return x + ((hs.c - v) / hs.a.squaredNorm()) * hs.a;
}

// Ball ||x||^2 <= rho2 intersected with a halfspace, in closed form.
CVec project_ball_halfspace(const CVec& y, double rho2, const Halfspace& hs) {
  const double a_norm = hs.a.norm();
  const double rho = std::sqrt(rho2);
  const double offset = hs.c / a_norm;  // signed distance of the hyperplane from 0
  if (offset > rho * (1.0 + 1e-12)) {
    throw InfeasibleSubproblem("project_gamma_feasible: ball and halfspace do not intersect");
  }
  const bool in_ball = y.squaredNorm() <= rho2;
  const bool in_half = hs.a.dot(y).real() >= hs.c;
  if (in_ball && in_half) return y;
  const double yn = y.norm();
  if (!in_ball) {
    const CVec pb = y * (rho / yn);
    if (hs.a.dot(pb).real() >= hs.c) return pb;
  }
  if (!in_half) {
    const CVec ph = project_halfspace(y, hs);
    if (ph.squaredNorm() <= rho2) return ph;
  }
  // Both constraints active: nearest point on the circle {||x|| = rho} on the hyperplane.
  const CVec a_hat = hs.a / a_norm;
  CVec perp = y - a_hat.dot(y).real() * a_hat;
  const double circle_r = std::sqrt(std::max(rho2 - offset * offset, 0.0));
  const double perp_norm = perp.norm();
  if (perp_norm == 0.0) {
    // Any orthogonal direction; use i * a_hat, which is orthogonal under Re<.,.>.
    perp = Complex(0.0, 1.0) * a_hat;
  } else {
    perp /= perp_norm;
  }
  return offset * a_hat + circle_r * perp;
}

}  // namespace

CVec project_gamma_feasible(const CVec& gamma, const CVec& gamma_bar, const RVec& r_diag,
                            double pr_max) {
  if (gamma.size() != r_diag.size() || gamma_bar.size() != r_diag.size()) {
    throw InvalidInput("project_gamma_feasible: size mismatch");
  }
  if ((r_diag.array() <= 0.0).any()) {
    throw InvalidInput("project_gamma_feasible: R must be positive definite");
  }
  const double tr = r_diag.sum();
  const double rho2 = pr_max + tr;
  const CVec rg = r_diag.cast<Complex>().cwiseProduct(gamma_bar);
  Halfspace hs{2.0 * rg, tr + gamma_bar.dot(rg).real()};
  if (hs.a.squaredNorm() == 0.0) {
    throw InfeasibleSubproblem("project_gamma_feasible: degenerate expansion point (gamma_bar = 0)");
  }
  // max over the weighted ball of Re{a^H x} is sqrt(rho2) ||R^{-1/2} a||.
  const double reach =
      std::sqrt(rho2) * std::sqrt((hs.a.cwiseAbs2().array() / r_diag.array()).sum());
  if (reach < hs.c * (1.0 - 1e-12)) {
    throw InfeasibleSubproblem("project_gamma_feasible: constraints do not intersect");
  }

  if (is_uniform(r_diag)) {
    return project_ball_halfspace(gamma, rho2 / r_diag(0), hs);
  }

  // Dykstra between the weighted ball (A) and the halfspace (B).
  CVec x = gamma;
  CVec inc_a = CVec::Zero(x.size());
  CVec inc_b = CVec::Zero(x.size());
  for (int it = 0; it < 100000; ++it) {
    const CVec u = project_weighted_ball(x + inc_a, r_diag, rho2);
    inc_a = x + inc_a - u;
    const CVec v = project_halfspace(u + inc_b, hs);
    inc_b = u + inc_b - v;
    const double change = (v - x).norm();
    x = v;
    if (change <= 1e-15 * (x.norm() + 1e-300)) break;
  }
  // Pull the last halfspace iterate back inside the ball if roundoff left it outside.
  const double v = r_diag.dot(x.cwiseAbs2());
  if (v > rho2) x *= std::sqrt(rho2 / v);
  return x;
}

namespace {

void require_square_hermitian(const CMat& x) {
  if (x.rows() != x.cols()) throw InvalidInput("project_psd_trace_band: matrix is not square");
  if ((x - x.adjoint()).norm() > 1e-9 * std::max(1.0, x.norm())) {
    throw InvalidInput("project_psd_trace_band: matrix is not Hermitian");
  }
}

// tau such that sum_i max(lambda_i - tau, 0) = target (target >= 0).
double simplex_shift(const RVec& lambda, double target) {
  std::vector<double> sorted(lambda.data(), lambda.data() + lambda.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0;
  double tau = sorted.front() - target;
  for (std::size_t j = 0; j < sorted.size(); ++j) {
    cumulative += sorted[j];
    const double candidate = (cumulative - target) / static_cast<double>(j + 1);
    if (sorted[j] > candidate) tau = candidate;
  }
  return tau;
}

CMat clip_psd(const CMat& x) {
  Eigen::SelfAdjointEigenSolver<CMat> es(x);
  const RVec lam = es.eigenvalues().cwiseMax(0.0);
  CMat out = es.eigenvectors() * lam.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
  return 0.5 * (out + out.adjoint());
}

}  // namespace

CMat project_psd_trace_band(const CMat& x, const RVec& r_diag, double lo, double hi) {
  require_square_hermitian(x);
  if (x.rows() != r_diag.size()) throw InvalidInput("project_psd_trace_band: size mismatch");
  if (lo > hi) throw InvalidInput("project_psd_trace_band: lo > hi");
  if ((r_diag.array() <= 0.0).any()) {
    throw InvalidInput("project_psd_trace_band: weights must be positive");
  }
  if (hi < 0.0) throw InfeasibleSubproblem("project_psd_trace_band: empty set (hi < 0)");
  const CMat xh = 0.5 * (x + x.adjoint());

  if (is_uniform(r_diag)) {
    const double r0 = r_diag(0);
    Eigen::SelfAdjointEigenSolver<CMat> es(xh);
    const RVec& lam = es.eigenvalues();
    const double clipped = lam.cwiseMax(0.0).sum() * r0;
    double tau = 0.0;
    if (clipped > hi) {
      tau = simplex_shift(lam, hi / r0);
    } else if (clipped < lo) {
      tau = simplex_shift(lam, lo / r0);
    }
    const RVec shifted = (lam.array() - tau).cwiseMax(0.0).matrix();
    CMat out =
        es.eigenvectors() * shifted.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
    return 0.5 * (out + out.adjoint());
  }

  const double r2 = r_diag.squaredNorm();
  auto project_slab = [&](const CMat& m) {
    const double t = m.diagonal().real().dot(r_diag);
    const double target = std::clamp(t, lo, hi);
    if (t == target) return m;
    CMat out = m;
    out.diagonal() -= (((t - target) / r2) * r_diag).cast<Complex>();
    return out;
  };
  CMat cur = xh;
  CMat inc_a = CMat::Zero(x.rows(), x.cols());
  CMat inc_b = CMat::Zero(x.rows(), x.cols());
  for (int it = 0; it < 20000; ++it) {
    const CMat u = project_slab(cur + inc_a);
    inc_a = cur + inc_a - u;
    const CMat v = clip_psd(u + inc_b);
    inc_b = u + inc_b - v;
    const double change = (v - cur).norm();
    cur = v;
    if (change <= 1e-14 * (cur.norm() + 1e-300)) break;
  }
  return cur;
}

CVec project_unit_modulus(const CVec& gamma) {
  CVec out(gamma.size());
  for (Eigen::Index n = 0; n < gamma.size(); ++n) {
    const double m = std::abs(gamma(n));
    out(n) = m > 0.0 ? gamma(n) / m : Complex(1.0, 0.0);
  }
  return out;
}

}  // namespace risgee::solvers
