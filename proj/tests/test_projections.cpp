// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "risgee/fractional.hpp"
#include "risgee/projections.hpp"
#include "support/oracles.hpp"

namespace risgee {
namespace {

using namespace risgee::testing;
using namespace risgee::solvers;

// Projection optimality: Re<x - P(x), y - P(x)> <= 0 for every feasible y.
double worst_variational_gap(const CVec& x, const CVec& px, const std::vector<CVec>& feasible) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& y : feasible) worst = std::max(worst, inner_real(CVec(x - px), CVec(y - px)));
  return worst;
}

RVec random_weights(Eigen::Index n, Rng& rng) {
  RVec r(n);
  for (Eigen::Index i = 0; i < n; ++i) r(i) = rng.uniform(0.2, 3.0);
  return r;
}

TEST(ProjectBox, Examples) {
  RVec p(3), pmax(3), expected(3);
  p << -1.0, 0.5, 3.0;
  pmax << 1.0, 1.0, 2.0;
  expected << 0.0, 0.5, 2.0;
  EXPECT_EQ(project_box(p, pmax), expected);
  EXPECT_EQ(project_box(expected, pmax), expected);
  EXPECT_THROW(project_box(RVec::Zero(2), pmax), InvalidInput);
}

TEST(ProjectPowerFeasible, InsideIsFixed) {
  RVec p(2), pmax(2), slope(2);
  p << 0.4, 0.6;
  pmax << 1.0, 1.0;
  slope << 1.0, 2.0;
  EXPECT_EQ(project_power_feasible(p, pmax, slope, -1.0, 2.0), p);
}

TEST(ProjectPowerFeasible, OptimalityAgainstSampledFeasiblePoints) {
  Rng rng(201);
  int projected = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const RVec pmax = RVec::Constant(3, 1.0);
    RVec slope(3);
    for (int i = 0; i < 3; ++i) slope(i) = rng.uniform(-1.0, 2.0);
    const double offset = rng.uniform(-1.0, 0.5);
    const double prmax = rng.uniform(0.1, 1.0);
    RVec p(3);
    for (int i = 0; i < 3; ++i) p(i) = rng.uniform(-0.5, 1.5);
    RVec q;
    try {
      q = project_power_feasible(p, pmax, slope, offset, prmax);
    } catch (const InfeasibleSubproblem&) {
      continue;
    }
    ++projected;
    const double band = slope.dot(q) + offset;
    EXPECT_GE(band, -1e-10);
    EXPECT_LE(band, prmax + 1e-10);
    EXPECT_GE(q.minCoeff(), 0.0);
    EXPECT_LE((q - pmax).maxCoeff(), 0.0);
    for (int s = 0; s < 300; ++s) {
      RVec y(3);
      for (int i = 0; i < 3; ++i) y(i) = rng.uniform(0.0, 1.0);
      const double b = slope.dot(y) + offset;
      if (b < 0.0 || b > prmax) continue;
      EXPECT_LE((p - q).dot(y - q), 1e-8);
    }
  }
  EXPECT_GE(projected, 20);
}

TEST(ProjectPowerFeasible, EmptyIntersectionThrows) {
  const RVec pmax = RVec::Constant(2, 1.0);
  const RVec slope = RVec::Constant(2, 1.0);
  // slope^T p - 10 <= -8 on the box, never >= 0.
  EXPECT_THROW(project_power_feasible(RVec::Zero(2), pmax, slope, -10.0, 1.0),
               InfeasibleSubproblem);
}

TEST(ProjectWeightedBall, MatchesBisectionOracle) {
  Rng rng(202);
  for (int trial = 0; trial < 50; ++trial) {
    const RVec r = random_weights(6, rng);
    const CVec x = 3.0 * random_cvec(6, rng);
    const double radius2 = rng.uniform(0.1, 2.0);
    // KKT: y = x / (1 + nu r) with nu found by bisection on the weighted norm.
    auto norm_at = [&](double nu) {
      return (r.array() * x.cwiseAbs2().array() / (1.0 + nu * r.array()).square()).sum();
    };
    CVec expected = x;
    if (norm_at(0.0) > radius2) {
      double lo = 0.0, hi = 1.0;
      while (norm_at(hi) > radius2) hi *= 2.0;
      for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        (norm_at(mid) > radius2 ? lo : hi) = mid;
      }
      expected = (x.array() / (1.0 + hi * r.array()).cast<Complex>()).matrix();
    }
    const CVec got = project_weighted_ball(x, r, radius2);
    EXPECT_LE((got - expected).norm(), 1e-9 * (1.0 + expected.norm()));
    EXPECT_LE(model::weighted_norm2(got, r), radius2 * (1.0 + 1e-14));
  }
}

TEST(ProjectGammaFeasible, UniformWeightsExample) {
  // R = I, tr R = 2, P_R,max = 2: ball ||x||^2 <= 4 and halfspace from gbar = (1, 1)
  // reading 2 Re(x1 + x2) - 2 >= 2.
  const RVec r = RVec::Ones(2);
  CVec gbar(2), x(2);
  gbar << 1.0, 1.0;
  x << 0.0, 0.0;
  const CVec got = project_gamma_feasible(x, gbar, r, 2.0);
  // Nearest point of the halfspace Re(x1 + x2) >= 2 is (1, 1), which lies in the ball.
  EXPECT_NEAR(std::abs(got(0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(got(1) - 1.0), 0.0, 1e-14);
}

TEST(ProjectGammaFeasible, OptimalityAgainstSampledFeasiblePoints) {
  Rng rng(203);
  for (int trial = 0; trial < 30; ++trial) {
    const bool uniform = trial % 2 == 0;
    const RVec r = uniform ? RVec::Constant(4, rng.uniform(0.5, 2.0)) : random_weights(4, rng);
    const double prmax = rng.uniform(0.5, 3.0);
    const CVec gbar = random_feasible_gamma(r, prmax, rng);
    const CVec x = 2.0 * random_cvec(4, rng);
    const CVec px = project_gamma_feasible(x, gbar, r, prmax);
    const double tr = r.sum();
    EXPECT_LE(model::weighted_norm2(px, r), tr + prmax + 1e-9);
    const double lin = 2.0 * gbar.dot(r.cast<Complex>().cwiseProduct(px)).real() -
                       model::weighted_norm2(gbar, r);
    EXPECT_GE(lin, tr - 1e-8 * tr);
    std::vector<CVec> feasible;
    while (feasible.size() < 300) {
      const CVec y = px + rng.uniform(0.0, 1.0) * random_cvec(4, rng);
      const double ly = 2.0 * gbar.dot(r.cast<Complex>().cwiseProduct(y)).real() -
                        model::weighted_norm2(gbar, r);
      if (model::weighted_norm2(y, r) <= tr + prmax && ly >= tr) feasible.push_back(y);
    }
    EXPECT_LE(worst_variational_gap(x, px, feasible), 1e-7 * (1.0 + x.squaredNorm()));
  }
}

TEST(ProjectGammaFeasible, ZeroExpansionPointThrows) {
  EXPECT_THROW(project_gamma_feasible(CVec::Ones(3), CVec::Zero(3), RVec::Ones(3), 1.0),
               InfeasibleSubproblem);
}

// Hermitian projection onto {psd, tr X in [lo, hi]} from the eigenvalue
// shift found by bisection.
CMat oracle_psd_band(const CMat& x, double lo, double hi) {
  Eigen::SelfAdjointEigenSolver<CMat> es(x);
  const RVec lam = es.eigenvalues();
  auto mass = [&](double tau) { return (lam.array() - tau).cwiseMax(0.0).sum(); };
  double tau = 0.0;
  const double target = mass(0.0) > hi ? hi : (mass(0.0) < lo ? lo : -1.0);
  if (target >= 0.0) {
    double a = lam.minCoeff() - target - 1.0, b = lam.maxCoeff() + 1.0;
    for (int i = 0; i < 300; ++i) {
      const double mid = 0.5 * (a + b);
      (mass(mid) > target ? a : b) = mid;
    }
    tau = 0.5 * (a + b);
  }
  const RVec shifted = (lam.array() - tau).cwiseMax(0.0).matrix();
  return es.eigenvectors() * shifted.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();
}

TEST(ProjectPsdTraceBand, UniformMatchesShiftOracle) {
  Rng rng(204);
  for (int trial = 0; trial < 40; ++trial) {
    const CMat x = 2.0 * random_hermitian(5, rng);
    const double lo = rng.uniform(0.5, 3.0);
    const double hi = lo + rng.uniform(0.0, 3.0);
    const CMat got = project_psd_trace_band(x, RVec::Ones(5), lo, hi);
    EXPECT_LE((got - oracle_psd_band(x, lo, hi)).norm(), 1e-9 * (1.0 + x.norm()));
  }
}

TEST(ProjectPsdTraceBand, Examples) {
  // Already feasible: unchanged.
  CMat x = CMat::Zero(2, 2);
  x(0, 0) = 1.0;
  x(1, 1) = 0.5;
  EXPECT_LE((project_psd_trace_band(x, RVec::Ones(2), 1.0, 2.0) - x).norm(), 1e-14);
  // diag(3, -1) with band [0, 1]: clip to diag(3, 0), then shift down to trace 1.
  x(0, 0) = 3.0;
  x(1, 1) = -1.0;
  CMat expected = CMat::Zero(2, 2);
  expected(0, 0) = 1.0;
  EXPECT_LE((project_psd_trace_band(x, RVec::Ones(2), 0.0, 1.0) - expected).norm(), 1e-14);
}

TEST(ProjectPsdTraceBand, WeightedOptimality) {
  Rng rng(205);
  for (int trial = 0; trial < 10; ++trial) {
    const RVec r = random_weights(4, rng);
    const CMat x = 2.0 * random_hermitian(4, rng);
    const double lo = rng.uniform(0.5, 2.0);
    const double hi = lo + rng.uniform(0.1, 2.0);
    const CMat px = project_psd_trace_band(x, r, lo, hi);
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<CMat>(px).eigenvalues().minCoeff(), -1e-10);
    const double t = px.diagonal().real().dot(r);
    EXPECT_GE(t, lo - 1e-8);
    EXPECT_LE(t, hi + 1e-8);
    // Feasible samples: random PSD matrices scaled into the band.
    double worst = -1.0;
    for (int s = 0; s < 200; ++s) {
      const CMat a = random_cmat(4, rng.uniform() < 0.5 ? 1 : 4, rng);
      CMat y = a * a.adjoint();
      y *= rng.uniform(lo, hi) / y.diagonal().real().dot(r);
      const CMat mix = 0.5 * (y + px);
      worst = std::max(worst, inner_real(CMat(x - px), CMat(mix - px)));
    }
    EXPECT_LE(worst, 1e-6 * (1.0 + x.squaredNorm()));
  }
}

TEST(ProjectPsdTraceBand, RejectsBadInput) {
  CMat x = CMat::Identity(2, 2);
  x(0, 1) = 1.0;
  EXPECT_THROW(project_psd_trace_band(x, RVec::Ones(2), 0.0, 1.0), InvalidInput);
  EXPECT_THROW(project_psd_trace_band(CMat::Identity(2, 2), RVec::Ones(2), 2.0, 1.0),
               InvalidInput);
  EXPECT_THROW(project_psd_trace_band(CMat::Identity(2, 2), RVec::Ones(2), -2.0, -1.0),
               InfeasibleSubproblem);
}

TEST(ProjectUnitModulus, Examples) {
  CVec g(3);
  g << Complex(3.0, 4.0), Complex(0.0, 0.0), Complex(-2.0, 0.0);
  const CVec u = project_unit_modulus(g);
  EXPECT_EQ(u(0), Complex(0.6, 0.8));
  EXPECT_EQ(u(1), Complex(1.0, 0.0));
  EXPECT_EQ(u(2), Complex(-1.0, 0.0));
}

TEST(ProjectUnitModulus, NearestPointOnTorus) {
  Rng rng(206);
  for (int trial = 0; trial < 100; ++trial) {
    const Complex z = rng.complex_normal();
    const Complex u = project_unit_modulus(CVec::Constant(1, z))(0);
    EXPECT_NEAR(std::abs(u), 1.0, 1e-15);
    for (int s = 0; s < 20; ++s) {
      EXPECT_LE(std::abs(z - u), std::abs(z - rng.unit_phase()) + 1e-15);
    }
  }
}

// ---- Dinkelbach and projected ascent ----

TEST(Dinkelbach, IncreasingRatioOnInterval) {
  // (2x + 1) / (x + 2) is increasing on [0, 1]; the maximum is 1 at x = 1.
  auto num = [](double x) { return 2.0 * x + 1.0; };
  auto den = [](double x) { return x + 2.0; };
  auto inner = [](double lambda, double) { return 2.0 - lambda > 0.0 ? 1.0 : 0.0; };
  const auto res = dinkelbach(num, den, inner, 0.0, 1e-12, 20);
  EXPECT_TRUE(res.converged);
  EXPECT_DOUBLE_EQ(res.x, 1.0);
  EXPECT_NEAR(res.ratio, 1.0, 1e-15);
  for (std::size_t i = 1; i < res.lambdas.size(); ++i) {
    EXPECT_GE(res.lambdas[i], res.lambdas[i - 1]);
  }
}

TEST(Dinkelbach, EqualNumeratorAndDenominator) {
  auto f = [](double x) { return 1.0 + x * x; };
  auto inner = [](double, double warm) { return warm; };
  const auto res = dinkelbach(f, f, inner, 0.7, 1e-12, 20);
  EXPECT_TRUE(res.converged);
  EXPECT_EQ(res.iterations, 1);
  EXPECT_DOUBLE_EQ(res.ratio, 1.0);
}

TEST(Dinkelbach, UnitDenominatorIsPlainMaximization) {
  auto num = [](double x) { return x - x * x; };
  auto den = [](double) { return 1.0; };
  auto inner = [](double, double) { return 0.5; };
  const auto res = dinkelbach(num, den, inner, 0.1, 1e-12, 20);
  EXPECT_TRUE(res.converged);
  EXPECT_DOUBLE_EQ(res.ratio, 0.25);
}

TEST(Dinkelbach, RejectsNonpositiveDenominator) {
  auto num = [](double) { return 1.0; };
  auto den = [](double) { return 0.0; };
  auto inner = [](double, double w) { return w; };
  EXPECT_THROW(dinkelbach(num, den, inner, 0.0, 1e-12, 5), NumericalError);
}

TEST(ProjectedAscent, QuadraticOverBoxReachesClippedCenter) {
  RVec c(3), pmax(3);
  c << -0.5, 0.3, 2.0;
  pmax << 1.0, 1.0, 1.0;
  auto f = [&](const RVec& x) { return -(x - c).squaredNorm(); };
  auto grad = [&](const RVec& x) { return RVec(-2.0 * (x - c)); };
  auto proj = [&](const RVec& x) { return project_box(x, pmax); };
  AscentOptions opts;
  opts.tol = 1e-14;
  const auto res = projected_concave_ascent(f, grad, proj, RVec(RVec::Constant(3, 0.5)), opts);
  EXPECT_LE((res.x - project_box(c, pmax)).norm(), 1e-7);

  // Started at the optimum it stays put.
  const auto again = projected_concave_ascent(f, grad, proj, project_box(c, pmax), opts);
  EXPECT_EQ(again.x, project_box(c, pmax));
  EXPECT_TRUE(again.converged);
}

TEST(ProjectedAscent, LinearObjectiveOverTraceBand) {
  // max tr(X) over {X psd, 1 <= tr X <= 3}: every iterate moves to the upper face.
  auto f = [](const CMat& x) { return x.trace().real(); };
  auto grad = [](const CMat& x) { return CMat(CMat::Identity(x.rows(), x.cols())); };
  auto proj = [](const CMat& x) { return project_psd_trace_band(x, RVec::Ones(2), 1.0, 3.0); };
  CMat x0 = CMat::Identity(2, 2);
  x0 *= 0.5;
  const auto res = projected_concave_ascent(f, grad, proj, x0, AscentOptions{});
  EXPECT_NEAR(res.value, 3.0, 1e-9);
}

TEST(ProjectedAscent, ValuesNeverDecrease) {
  Rng rng(207);
  const CMat a = random_hermitian(4, rng);
  const CMat q = a * a.adjoint() + CMat::Identity(4, 4);
  const CVec b = random_cvec(4, rng);
  std::vector<double> seen;
  auto f = [&](const CVec& x) {
    const double v = b.dot(x).real() - x.dot(q * x).real();
    seen.push_back(v);
    return v;
  };
  auto grad = [&](const CVec& x) { return CVec(b - 2.0 * q * x); };
  auto proj = [](const CVec& x) { return project_weighted_ball(x, RVec::Ones(4), 0.25); };
  const auto res = projected_concave_ascent(f, grad, proj, CVec(CVec::Zero(4)), AscentOptions{});
  EXPECT_GE(res.value, seen.front());
  EXPECT_LE(model::weighted_norm2(res.x, RVec::Ones(4)), 0.25 * (1.0 + 1e-14));
}

}  // namespace
}  // namespace risgee
