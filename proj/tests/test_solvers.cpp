// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "risgee/scenario.hpp"
#include "risgee/solvers.hpp"
#include "support/oracles.hpp"

namespace risgee {
namespace {

using namespace risgee::testing;
using namespace risgee::solvers;

ScenarioConfig toy_config() {
  auto doc = config_io::default_document();
  doc["users"] = 1;
  doc["bs_antennas"] = 2;
  doc["ris_elements"] = 2;
  return config_io::to_config(doc);
}

ChannelSet draw(const ScenarioConfig& cfg, std::uint64_t t) {
  return scenario::build_scenario(cfg, t).realization.channels;
}

// Nondecreasing up to `slack` on the per-hertz scale the solver works in.
void expect_monotone(const SolveReport& r, double bandwidth, double slack = 1e-9) {
  for (std::size_t i = 1; i < r.gee_trajectory.size(); ++i) {
    EXPECT_GE(r.gee_trajectory[i] / bandwidth, r.gee_trajectory[i - 1] / bandwidth - slack)
        << r.method << " step " << i;
  }
}

TEST(SolverOptions, Validation) {
  SolverOptions opts;
  EXPECT_NO_THROW(opts.validate());
  opts.tol_outer = 0.0;
  EXPECT_THROW(opts.validate(), InvalidInput);
  opts = SolverOptions{};
  opts.max_outer = 0;
  EXPECT_THROW(opts.validate(), InvalidInput);
  opts = SolverOptions{};
  opts.armijo = 1.0;
  EXPECT_THROW(opts.validate(), InvalidInput);
}

TEST(DefaultInit, OnesAndHalfBudget) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, 0);
  const auto init = default_init(ch, cfg);
  EXPECT_EQ(init.gamma, CVec::Ones(16));
  EXPECT_EQ(init.p, 0.5 * cfg.p_max_w);
  EXPECT_EQ(init.filters.size(), 2u);
}

TEST(Audit, FeasibleAllocationHasZeroResiduals) {
  const auto cfg = unit_config(2, 2, 4);
  Rng rng(301);
  const auto ch = random_channels(cfg, rng);
  const RVec p = random_power(cfg, rng);
  Allocation a{random_feasible_gamma(oracle_r(p, ch, cfg), cfg.pr_max_w, rng), p, {}};
  EXPECT_EQ(audit(a, ch, cfg).worst(), 0.0);
  a.p(0) = cfg.p_max_w(0) + 0.25;
  EXPECT_DOUBLE_EQ(audit(a, ch, cfg).box, 0.25);
  a.p = p;
  a.gamma.setZero();
  EXPECT_NEAR(audit(a, ch, cfg).band_low, oracle_r(p, ch, cfg).sum(), 1e-12);
}

TEST(RankOneExtract, UnitRankIsLossless) {
  Rng rng(302);
  const RVec r = RVec::LinSpaced(4, 0.5, 2.0);
  const CVec g0 = random_feasible_gamma(r, 3.0, rng);
  const CMat x = g0 * g0.adjoint();
  ExtractionInfo info;
  int calls = 0;
  const CVec g = rank_one_extract(
      x, r, 3.0, [&](const CVec&) { return static_cast<double>(++calls); }, 50, rng, 1e-8, &info);
  EXPECT_TRUE(info.rank_one);
  // Equal up to a common phase.
  const Complex phase = g0.dot(g) / std::abs(g0.dot(g));
  EXPECT_LE((g - phase * g0).norm(), 1e-10 * g0.norm());
}

TEST(RankOneExtract, UnitRankLosslessInGee) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, 1);
  const auto report = method2_solve(ch, cfg, default_init(ch, cfg), SolverOptions{});
  const CVec& g0 = report.allocation.gamma;
  const RVec r = model::matrix_r(report.allocation.p, ch, cfg);
  Rng rng(303);
  auto objective = [&](const CVec& g) {
    return model::gee_mmse(g, report.allocation.p, ch, cfg).gee_bits_per_joule;
  };
  const CVec g = rank_one_extract(g0 * g0.adjoint(), r, cfg.pr_max_w, objective, 20, rng);
  EXPECT_LE(relative_error(objective(g), objective(g0)), 1e-8);
}

TEST(RankOneExtract, ReturnsBestCandidateAndIsFeasible) {
  Rng rng(304);
  const RVec r = RVec::LinSpaced(5, 0.5, 2.0);
  const CVec a = random_cvec(5, rng);
  const CVec b = random_cvec(5, rng);
  const CMat x = a * a.adjoint() + 0.6 * b * b.adjoint();
  const CVec target = random_cvec(5, rng);
  std::vector<double> seen;
  auto objective = [&](const CVec& g) {
    const double v = std::norm(target.dot(g));
    seen.push_back(v);
    return v;
  };
  ExtractionInfo info;
  const CVec g = rank_one_extract(x, r, 2.0, objective, 100, rng, 1e-8, &info);
  EXPECT_FALSE(info.rank_one);
  ASSERT_EQ(seen.size(), 101u);  // principal eigenvector plus every sample
  EXPECT_EQ(info.best_value, *std::max_element(seen.begin(), seen.end()));
  EXPECT_DOUBLE_EQ(std::norm(target.dot(g)), info.best_value);
  const double s = model::weighted_norm2(g, r);
  EXPECT_GE(s, r.sum() * (1.0 - 1e-12));
  EXPECT_LE(s, (r.sum() + 2.0) * (1.0 + 1e-12));
}

TEST(RankOneExtract, ToyInstanceNearGridOptimum) {
  const auto cfg = toy_config();
  const auto ch = draw(cfg, 2);
  const auto oracle = toy_active_oracle(ch, cfg);
  const RVec p = RVec::Constant(1, oracle.p);
  const RVec r = model::matrix_r(p, ch, cfg);
  // A rank-two relaxation around the optimum.
  Rng rng(305);
  const CVec other = random_cvec(2, rng) * oracle.gamma.norm();
  const CMat x = oracle.gamma * oracle.gamma.adjoint() + 0.2 * other * other.adjoint();
  auto objective = [&](const CVec& g) { return model::gee_mmse(g, p, ch, cfg).gee_bits_per_joule; };
  const CVec g = rank_one_extract(x, r, cfg.pr_max_w, objective, 200, rng);
  EXPECT_GE(objective(g), 0.95 * oracle.gee);
}

TEST(RankOneExtract, RejectsBadInput) {
  Rng rng(306);
  auto objective = [](const CVec&) { return 0.0; };
  EXPECT_THROW(rank_one_extract(-CMat::Identity(2, 2), RVec::Ones(2), 1.0, objective, 5, rng),
               NumericalError);
  EXPECT_THROW(rank_one_extract(CMat::Identity(2, 2), RVec::Ones(3), 1.0, objective, 5, rng),
               InvalidInput);
}

class ToySolve : public ::testing::TestWithParam<int> {};

TEST_P(ToySolve, BothMethodsNearGridOracle) {
  const auto cfg = toy_config();
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const auto oracle = toy_active_oracle(ch, cfg);
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto r = solve(m, ch, cfg, default_init(ch, cfg), SolverOptions{});
    EXPECT_GE(r.final.gee_bits_per_joule, 0.95 * oracle.gee) << r.method;
    // The oracle is a global optimum up to grid resolution.
    EXPECT_LE(r.final.gee_bits_per_joule, oracle.gee * (1.0 + 1e-6)) << r.method;
    expect_monotone(r, cfg.bandwidth_hz);
    EXPECT_LE(r.residuals.worst(), 1e-8);
  }
}

TEST_P(ToySolve, StartingAtOptimumStaysThere) {
  const auto cfg = toy_config();
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const auto oracle = toy_active_oracle(ch, cfg);
  Allocation init{oracle.gamma, RVec::Constant(1, oracle.p), {}};
  init.filters = model::mmse_filters(init.gamma, init.p, ch, cfg);
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto r = solve(m, ch, cfg, init, SolverOptions{});
    EXPECT_GE(r.final.gee_bits_per_joule, oracle.gee * (1.0 - 1e-9)) << r.method;
    EXPECT_LE(r.final.gee_bits_per_joule, oracle.gee * (1.0 + 1e-6)) << r.method;
    expect_monotone(r, cfg.bandwidth_hz);
  }
}

TEST_P(ToySolve, PassiveNearPhaseGridOracle) {
  const auto cfg = toy_config();
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const auto oracle = toy_passive_oracle(ch, cfg);
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto r = passive_solve(ch, cfg, m, SolverOptions{});
    EXPECT_GE(r.final.gee_bits_per_joule, 0.95 * oracle.gee) << r.method;
  }
}

INSTANTIATE_TEST_SUITE_P(Draws, ToySolve, ::testing::Values(0, 1, 2));

class DeskSolve : public ::testing::TestWithParam<int> {};

TEST_P(DeskSolve, MonotoneFeasibleConverged) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const SolverOptions opts;
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto r = solve(m, ch, cfg, default_init(ch, cfg), opts);
    expect_monotone(r, cfg.bandwidth_hz);
    EXPECT_LE(r.residuals.worst(), 1e-8) << r.method;
    EXPECT_EQ(r.gee_trajectory.size(), static_cast<std::size_t>(r.outer_iterations) + 1);
    EXPECT_GT(r.final.gee_bits_per_joule, r.gee_trajectory.front()) << r.method;
    // The reported value is the GEE of the returned allocation.
    const auto check = model::gee(r.allocation, ch, cfg);
    EXPECT_LE(relative_error(check.gee_bits_per_joule, r.final.gee_bits_per_joule), 1e-12);
  }
}

TEST_P(DeskSolve, PassiveStaysOnTorus) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const auto pcfg = passive_variant(cfg);
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto r = passive_solve(ch, cfg, m, SolverOptions{});
    EXPECT_LE(r.residuals.unit_modulus, 1e-15) << r.method;
    const RVec rd = model::matrix_r(r.allocation.p, ch, pcfg);
    EXPECT_LE(std::abs(model::rf_power(r.allocation.gamma, rd)), 1e-12 * rd.sum());
    expect_monotone(r, cfg.bandwidth_hz);
  }
}

TEST_P(DeskSolve, SumRateModeTradesEfficiencyForRate) {
  const auto cfg = desk_config(10.0);
  const auto ch = draw(cfg, static_cast<std::uint64_t>(GetParam()));
  const auto gee_run = method2_solve(ch, cfg, default_init(ch, cfg), SolverOptions{});
  const auto sr_run = sum_rate_mode(ch, cfg, Method::kEmbeddedMmse, SolverOptions{});
  EXPECT_GE(sr_run.final.sum_rate_bps, gee_run.final.sum_rate_bps * (1.0 - 1e-6));
  EXPECT_LE(sr_run.post_hoc_gee, gee_run.final.gee_bits_per_joule * (1.0 + 1e-6));
  EXPECT_DOUBLE_EQ(sr_run.post_hoc_gee, sr_run.final.gee_bits_per_joule);
}

INSTANTIATE_TEST_SUITE_P(Draws, DeskSolve, ::testing::Values(0, 1, 2));

TEST(SumRateMode, CoincidesWithGeeAtLowBudget) {
  // At -40 dBW both objectives spend the whole budget.
  const auto cfg = desk_config(-40.0);
  const auto ch = draw(cfg, 3);
  const auto gee_run = method2_solve(ch, cfg, default_init(ch, cfg), SolverOptions{});
  const auto sr_run = sum_rate_mode(ch, cfg, Method::kEmbeddedMmse, SolverOptions{});
  EXPECT_LE(relative_error(sr_run.post_hoc_gee, gee_run.final.gee_bits_per_joule), 1e-3);
}

TEST(PmaxSweep, FinalGeeNondecreasingInBudget) {
  const auto ch = draw(desk_config(0.0), 4);
  double previous = 0.0;
  for (double dbw = -40.0; dbw <= 20.0; dbw += 10.0) {
    const auto cfg = desk_config(dbw);
    const auto r = method2_solve(ch, cfg, default_init(ch, cfg), SolverOptions{});
    EXPECT_GE(r.final.gee_bits_per_joule, previous * (1.0 - 1e-6)) << dbw << " dBW";
    previous = std::max(previous, r.final.gee_bits_per_joule);
  }
}

TEST(Solve, RejectsMismatchedChannels) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, 0);
  auto other = cfg;
  other.ris_elements = 8;
  EXPECT_THROW(method1_solve(ch, other, default_init(ch, cfg), SolverOptions{}), InvalidInput);
  SolverOptions bad;
  bad.max_outer = 0;
  EXPECT_THROW(method2_solve(ch, cfg, default_init(ch, cfg), bad), InvalidInput);
}

TEST(Solve, DeterministicReplay) {
  const auto cfg = desk_config(0.0);
  const auto ch = draw(cfg, 5);
  for (Method m : {Method::kAlternating, Method::kEmbeddedMmse}) {
    const auto a = solve(m, ch, cfg, default_init(ch, cfg), SolverOptions{});
    const auto b = solve(m, ch, cfg, default_init(ch, cfg), SolverOptions{});
    EXPECT_EQ(a.gee_trajectory, b.gee_trajectory) << a.method;
    EXPECT_EQ(a.allocation.gamma, b.allocation.gamma) << a.method;
  }
}

}  // namespace
}  // namespace risgee
