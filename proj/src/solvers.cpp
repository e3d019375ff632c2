// SPDX-License-Identifier: Apache-2.0
#include "risgee/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

#include "risgee/fractional.hpp"
#include "risgee/projections.hpp"
#include "risgee/surrogates.hpp"

namespace risgee::solvers {

std::string method_name(Method m) {
  return m == Method::kAlternating ? "method1" : "method2";
}

void SolverOptions::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidInput(std::string("solver options: ") + what);
  };
  require(tol_outer > 0.0 && tol_sequential > 0.0 && tol_dinkelbach > 0.0 && tol_inner > 0.0,
          "tolerances must be > 0");
  require(max_outer >= 1 && max_sequential >= 1 && max_dinkelbach >= 1 && max_ascent >= 1,
          "iteration limits must be >= 1");
  require(armijo > 0.0 && armijo < 1.0, "armijo constant must lie in (0, 1)");
  require(backtrack > 0.0 && backtrack < 1.0, "backtracking factor must lie in (0, 1)");
  require(randomization_samples >= 0, "randomization sample count must be >= 0");
  require(rank_tol > 0.0, "rank tolerance must be > 0");
}

double ConstraintResiduals::worst() const { return std::max({box, band_low, band_high}); }

ConstraintResiduals audit(const Allocation& alloc, const ChannelSet& ch,
                          const ScenarioConfig& cfg) {
  ConstraintResiduals out;
  for (Eigen::Index k = 0; k < alloc.p.size(); ++k) {
    out.box = std::max({out.box, -alloc.p(k), alloc.p(k) - cfg.p_max_w(k)});
  }
  const RVec r = model::matrix_r(alloc.p, ch, cfg);
  const double rf = model::rf_power(alloc.gamma, r);
  out.band_low = std::max(0.0, -rf);
  out.band_high = std::max(0.0, rf - cfg.pr_max_w);
  for (Eigen::Index n = 0; n < alloc.gamma.size(); ++n) {
    out.unit_modulus = std::max(out.unit_modulus, std::abs(std::abs(alloc.gamma(n)) - 1.0));
  }
  return out;
}

Allocation default_init(const ChannelSet& ch, const ScenarioConfig& cfg) {
  ch.check(cfg);
  Allocation out;
  out.gamma = CVec::Ones(ch.elements());
  out.p = 0.5 * cfg.p_max_w;
  out.filters = model::mmse_filters(out.gamma, out.p, ch, cfg);
  return out;
}

CVec rank_one_extract(const CMat& x, const RVec& r_diag, double pr_max,
                      const std::function<double(const CVec&)>& objective, int samples,
                      Rng& rng, double rank_tol, ExtractionInfo* info) {
  surrogates::require_hermitian(x, "rank_one_extract");
  if (x.rows() != r_diag.size()) throw InvalidInput("rank_one_extract: size mismatch");
  const Eigen::Index n = x.rows();
  Eigen::SelfAdjointEigenSolver<CMat> es(0.5 * (x + x.adjoint()));
  const RVec& lam = es.eigenvalues();  // ascending
  const double l1 = lam(n - 1);
  if (!(l1 > 0.0)) throw NumericalError("rank_one_extract: lifted matrix has no positive eigenvalue");
  const double l2 = n > 1 ? std::max(lam(n - 2), 0.0) : 0.0;
  const double ratio = l2 / l1;

  const double lo = r_diag.sum();
  const double hi = lo + pr_max;
  auto fit = [&](CVec g) {
    const double s = model::weighted_norm2(g, r_diag);
    if (s > 0.0) {
      if (s < lo) {
        g *= std::sqrt(lo / s);
      } else if (s > hi) {
        g *= std::sqrt(hi / s);
      }
    }
    return g;
  };

  ExtractionInfo local;
  local.rank_ratio = ratio;
  CVec best = fit(std::sqrt(l1) * es.eigenvectors().col(n - 1));
  if (ratio <= rank_tol) {
    local.rank_one = true;
    if (info) *info = local;
    return best;
  }
  double best_value = objective(best);
  const CMat factor =
      es.eigenvectors() * lam.cwiseMax(0.0).cwiseSqrt().cast<Complex>().asDiagonal();
  CVec w(n);
  for (int i = 0; i < samples; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) w(j) = rng.complex_normal();
    CVec cand = fit(factor * w);
    if (cand.squaredNorm() == 0.0) continue;
    const double v = objective(cand);
    if (v > best_value) {
      best_value = v;
      best = std::move(cand);
      local.best_index = i;
    }
  }
  local.best_value = best_value;
  if (info) *info = local;
  return best;
}

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

template <typename F>
auto staged(const char* stage, F&& f) {
  try {
    return f();
  } catch (const SolverError&) {
    throw;
  } catch (const std::exception& e) {
    throw SolverError(stage, e.what());
  }
}

// All objectives inside the solvers are per hertz: bits/s/Hz over watts.
double normalized_gee(const Allocation& a, const ChannelSet& ch, const ScenarioConfig& cfg) {
  return model::gee(a, ch, cfg).gee_bits_per_joule / cfg.bandwidth_hz;
}

double normalized_gee_mmse(const CVec& gamma, const RVec& p, const ChannelSet& ch,
                           const ScenarioConfig& cfg) {
  const double den = model::total_power(gamma, p, ch, cfg);
  if (!(den > 0.0)) throw DegenerateConfig("total power is not positive");
  return model::sum_rate_mmse(gamma, p, ch, cfg) / den;
}

// Total power minus gamma^H R gamma.
double power_without_gamma(const RVec& p, const ChannelSet& ch, const ScenarioConfig& cfg) {
  double out = cfg.static_power_w() - cfg.sigma2_ris_w * ch.elements();
  for (int k = 0; k < ch.users(); ++k) out += p(k) * (cfg.mu(k) - ch.h[k].squaredNorm());
  return out;
}

CMat scale_both_sides(const CMat& m, const RVec& d) {
  const CVec dc = d.cast<Complex>();
  CMat out = dc.asDiagonal() * m * dc.asDiagonal();
  return 0.5 * (out + out.adjoint());
}

struct Context {
  const ChannelSet& ch;
  const ScenarioConfig& cfg;
  const SolverOptions& opts;
  Rng rng;
  int ascent_cap_hits = 0;
  int dinkelbach_cap_hits = 0;
  double last_psd_min_eig = 0.0;
  double last_rank_ratio = 0.0;

  AscentOptions ascent(double scale) const {
    AscentOptions a;
    a.tol = opts.tol_inner;
    a.value_scale = scale > 0.0 ? scale : 1.0;
    a.max_iters = opts.max_ascent;
    a.armijo = opts.armijo;
    a.backtrack = opts.backtrack;
    return a;
  }

  template <typename Point, typename Num, typename Den, typename Grad, typename Proj>
  DinkelbachResult<Point> fractional(Num&& num, Den&& den, Grad&& grad_num, Proj&& project,
                                     Point x0) {
    auto inner = [&](double lambda, const Point& warm) {
      auto f = [&](const Point& x) { return num(x) - lambda * den(x); };
      auto g = [&](const Point& x) -> Point { return grad_num(x, lambda); };
      const double scale = std::abs(num(warm)) + std::abs(lambda * den(warm));
      auto res = projected_concave_ascent(f, g, project, warm, ascent(scale));
      if (res.hit_max_iters) ++ascent_cap_hits;
      return res.x;
    };
    auto out = dinkelbach(num, den, inner, project(x0), opts.tol_dinkelbach, opts.max_dinkelbach);
    if (!out.converged) ++dinkelbach_cap_hits;
    return out;
  }

  bool settled(double before, double after) const {
    return after - before <= opts.tol_sequential * std::abs(after);
  }
};

// ---- gamma steps ----

// Over-relaxed surrogate step: from the surrogate maximizer x_new, keep walking
// along x_new - x_prev, doubling the stride while the true objective improves.
// Any accepted point is feasible and better than x_new, so monotonicity holds.
template <typename Point, typename Objective, typename Projection>
Point extrapolate(const Point& x_prev, const Point& x_new, double value_new,
                  Objective&& objective, Projection&& project, int max_doublings,
                  double* value_out) {
  Point best = x_new;
  double best_value = value_new;
  const Point dir = x_new - x_prev;
  double beta = 1.0;
  for (int i = 0; i < max_doublings; ++i) {
    Point cand = project(Point(x_new + beta * dir));
    double v = -std::numeric_limits<double>::infinity();
    try {
      v = objective(cand);
    } catch (const std::runtime_error&) {
      break;
    }
    if (!(v > best_value)) break;
    best = std::move(cand);
    best_value = v;
    beta *= 2.0;
  }
  *value_out = best_value;
  return best;
}

// Radial rescale into tr R <= gamma^H R gamma <= tr R + P_R,max.
CVec fit_band(CVec g, const RVec& r_diag, double pr_max) {
  const double s = model::weighted_norm2(g, r_diag);
  const double lo = r_diag.sum();
  if (s > 0.0 && s < lo) g *= std::sqrt(lo / s);
  if (s > lo + pr_max) g *= std::sqrt((lo + pr_max) / s);
  return g;
}

// Sequential surrogate maximization over gamma with filters and powers fixed,
// in whitened coordinates z = (R / mean(R))^{1/2} gamma where the feasible set
// becomes a ball intersected with a halfspace.
CVec gamma_step_fixed_filters(const Allocation& cur, Context& ctx, int* iterations) {
  const auto& ch = ctx.ch;
  const auto& cfg = ctx.cfg;
  const Eigen::Index n = ch.elements();
  const RVec r = model::matrix_r(cur.p, ch, cfg);
  const double r_mean = r.mean();
  const RVec sq = (r / r_mean).cwiseSqrt();
  const RVec isq = sq.cwiseInverse();
  const RVec uniform = RVec::Constant(n, r_mean);
  const double offset = power_without_gamma(cur.p, ch, cfg);
  auto to_gamma = [&](const CVec& z) { return CVec(isq.cast<Complex>().cwiseProduct(z)); };
  auto true_value = [&](const CVec& z) {
    return normalized_gee(Allocation{to_gamma(z), cur.p, cur.filters}, ch, cfg);
  };
  auto fit = [&](const CVec& z) { return fit_band(z, uniform, cfg.pr_max_w); };

  CVec gamma_bar = cur.gamma;
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    const CVec gb = surrogates::perturb_expansion_point(gamma_bar, cur.p, cur.filters, ch);
    const auto coeffs = surrogates::build_gamma_coeffs(gb, cur.p, cur.filters, ch, cfg);
    const auto quad = surrogates::gamma_sum_surrogate(coeffs);
    const CVec b = isq.cast<Complex>().cwiseProduct(quad.b);
    const CMat q = scale_both_sides(quad.q, isq);
    const CVec zbar = sq.cast<Complex>().cwiseProduct(gb);

    auto num = [&](const CVec& z) { return quad.c0 + b.dot(z).real() - z.dot(q * z).real(); };
    auto den = [&](const CVec& z) { return r_mean * z.squaredNorm() + offset; };
    auto grad = [&](const CVec& z, double lambda) -> CVec {
      return b - 2.0 * (q * z) - (2.0 * lambda * r_mean) * z;
    };
    auto project = [&](const CVec& z) {
      return project_gamma_feasible(z, zbar, uniform, cfg.pr_max_w);
    };
    const auto res = ctx.fractional(num, den, grad, project, zbar);
    ++*iterations;
    const double before = true_value(zbar);
    double after = true_value(res.x);
    const CVec z_next = after >= before
                            ? extrapolate(zbar, res.x, after, true_value, fit,
                                          ctx.opts.max_extrapolation, &after)
                            : zbar;
    gamma_bar = to_gamma(z_next);
    if (ctx.settled(before, after)) break;
  }
  return gamma_bar;
}

// Lifted step: sequential linearization of the interference log-det term over
// Z = D X D with D = (R / mean(R))^{1/2}, then extraction of a rank-one gamma.
CVec gamma_step_lifted(const Allocation& cur, Context& ctx, int* iterations) {
  const auto& ch = ctx.ch;
  const auto& cfg = ctx.cfg;
  const Eigen::Index n = ch.elements();
  const RVec r = model::matrix_r(cur.p, ch, cfg);
  const double r_mean = r.mean();
  const RVec sq = (r / r_mean).cwiseSqrt();
  const RVec isq = sq.cwiseInverse();
  const RVec uniform = RVec::Constant(n, r_mean);
  const double tr_r = r.sum();
  const double offset = power_without_gamma(cur.p, ch, cfg);
  auto project = [&](const CMat& z) {
    return project_psd_trace_band(z, uniform, tr_r, tr_r + cfg.pr_max_w);
  };
  auto true_value = [&](const CMat& z) {
    return surrogates::sum_rate_mmse_x(scale_both_sides(z, isq), cur.p, ch, cfg) /
           (r_mean * z.trace().real() + offset);
  };

  const CVec zg = sq.cast<Complex>().cwiseProduct(cur.gamma);
  CMat z_cur = zg * zg.adjoint();
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    const CMat xbar = scale_both_sides(z_cur, isq);
    const auto lin = surrogates::linearize_g2(xbar, cur.p, ch, cfg);
    const CMat lin_grad_z = scale_both_sides(lin.gradient, isq);
    const double lin_const = lin.value - inner_real(lin.gradient, xbar);

    auto num = [&](const CMat& z) {
      return surrogates::g1_x(scale_both_sides(z, isq), cur.p, ch, cfg) - lin_const -
             inner_real(lin_grad_z, z);
    };
    auto den = [&](const CMat& z) { return r_mean * z.trace().real() + offset; };
    auto grad = [&](const CMat& z, double lambda) -> CMat {
      CMat g = scale_both_sides(surrogates::grad_g1(scale_both_sides(z, isq), cur.p, ch, cfg),
                                isq) -
               lin_grad_z;
      g.diagonal().array() -= lambda * r_mean;
      return g;
    };
    const auto res = ctx.fractional(num, den, grad, project, z_cur);
    ++*iterations;
    const double before = true_value(z_cur);
    double after = true_value(res.x);
    if (after >= before) {
      z_cur = extrapolate(z_cur, res.x, after, true_value, project, ctx.opts.max_extrapolation,
                          &after);
    }
    if (ctx.settled(before, after)) break;
  }

  Eigen::SelfAdjointEigenSolver<CMat> es(z_cur, Eigen::EigenvaluesOnly);
  ctx.last_psd_min_eig = es.eigenvalues()(0);
  auto objective = [&](const CVec& g) { return normalized_gee_mmse(g, cur.p, ch, cfg); };
  ExtractionInfo info;
  CVec gamma = rank_one_extract(scale_both_sides(z_cur, isq), r, cfg.pr_max_w, objective,
                                ctx.opts.randomization_samples, ctx.rng, ctx.opts.rank_tol, &info);
  ctx.last_rank_ratio = info.rank_ratio;
  // Randomized candidates from a loose relaxation can sit well below the
  // relaxed value, and the lifted iteration crawls once it is nearly rank
  // one. Polish the better of the extracted and current gamma by monotone
  // projected ascent on the GEE with MMSE filters, whose gradient in gamma is
  // 2 (grad G1 - grad G2)(gamma gamma^H) gamma.
  if (objective(cur.gamma) > objective(gamma)) gamma = cur.gamma;
  auto to_gamma = [&](const CVec& z) { return CVec(isq.cast<Complex>().cwiseProduct(z)); };
  auto z_value = [&](const CVec& z) { return objective(to_gamma(z)); };
  auto z_grad = [&](const CVec& z) -> CVec {
    const CVec g = to_gamma(z);
    const CMat x = g * g.adjoint();
    const double den = r_mean * z.squaredNorm() + offset;
    const double num = surrogates::sum_rate_mmse_x(x, cur.p, ch, cfg);
    const CMat d = surrogates::grad_g1(x, cur.p, ch, cfg) -
                   surrogates::linearize_g2(x, cur.p, ch, cfg).gradient;
    const CVec gnum = 2.0 * isq.cast<Complex>().cwiseProduct(d * g);
    return (gnum - (2.0 * r_mean * num / den) * z) / den;
  };
  auto shell = [&](const CVec& z) { return fit_band(z, uniform, cfg.pr_max_w); };
  const CVec z0 = shell(sq.cast<Complex>().cwiseProduct(gamma));
  auto polished = projected_concave_ascent(z_value, z_grad, shell, z0,
                                           ctx.ascent(std::abs(z_value(z0))));
  if (polished.hit_max_iters) ++ctx.ascent_cap_hits;
  return to_gamma(polished.value >= z_value(z0) ? polished.x : z0);
}

// Passive surface, fixed filters: the power is constant on the unit-modulus
// torus, so each surrogate is ascended directly over the phases.
CVec gamma_step_phases_fixed_filters(const Allocation& cur, Context& ctx, int* iterations) {
  auto true_value = [&](const CVec& g) {
    return normalized_gee(Allocation{g, cur.p, cur.filters}, ctx.ch, ctx.cfg);
  };
  CVec gamma_bar = cur.gamma;
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    const CVec gb = surrogates::perturb_expansion_point(gamma_bar, cur.p, cur.filters, ctx.ch);
    const auto coeffs = surrogates::build_gamma_coeffs(gb, cur.p, cur.filters, ctx.ch, ctx.cfg);
    const auto quad = surrogates::gamma_sum_surrogate(coeffs);
    auto f = [&](const CVec& g) { return quad.value(g); };
    auto grad = [&](const CVec& g) { return quad.gradient(g); };
    const CVec start = project_unit_modulus(gb);
    auto res = projected_concave_ascent(f, grad, project_unit_modulus, start,
                                        ctx.ascent(std::abs(quad.value(start))));
    if (res.hit_max_iters) ++ctx.ascent_cap_hits;
    ++*iterations;
    const double before = true_value(start);
    double after = true_value(res.x);
    gamma_bar = after >= before ? extrapolate(start, res.x, after, true_value,
                                              project_unit_modulus, ctx.opts.max_extrapolation,
                                              &after)
                                : start;
    if (ctx.settled(before, after)) break;
  }
  return gamma_bar;
}

// Passive surface with MMSE filters: G1(gamma gamma^H) minus the linearized
// interference term, ascended over the phases.
CVec gamma_step_phases_mmse(const Allocation& cur, Context& ctx, int* iterations) {
  const auto& ch = ctx.ch;
  const auto& cfg = ctx.cfg;
  auto true_value = [&](const CVec& g) { return normalized_gee_mmse(g, cur.p, ch, cfg); };
  CVec gamma = cur.gamma;
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    const CMat xbar = gamma * gamma.adjoint();
    const auto lin = surrogates::linearize_g2(xbar, cur.p, ch, cfg);
    const double lin_const = lin.value - inner_real(lin.gradient, xbar);
    auto f = [&](const CVec& g) {
      const CMat x = g * g.adjoint();
      return surrogates::g1_x(x, cur.p, ch, cfg) - lin_const - inner_real(lin.gradient, x);
    };
    auto grad = [&](const CVec& g) -> CVec {
      const CMat x = g * g.adjoint();
      return 2.0 * ((surrogates::grad_g1(x, cur.p, ch, cfg) - lin.gradient) * g);
    };
    auto res = projected_concave_ascent(f, grad, project_unit_modulus, gamma,
                                        ctx.ascent(std::abs(f(gamma))));
    if (res.hit_max_iters) ++ctx.ascent_cap_hits;
    ++*iterations;
    const double before = true_value(gamma);
    double after = true_value(res.x);
    if (after >= before) {
      gamma = extrapolate(gamma, res.x, after, true_value, project_unit_modulus,
                          ctx.opts.max_extrapolation, &after);
    }
    if (ctx.settled(before, after)) break;
  }
  // Same polish as the lifted step, on the torus.
  auto grad = [&](const CVec& g) -> CVec {
    const CMat x = g * g.adjoint();
    const double den = model::total_power(g, cur.p, ch, cfg);
    const CMat d = surrogates::grad_g1(x, cur.p, ch, cfg) -
                   surrogates::linearize_g2(x, cur.p, ch, cfg).gradient;
    return (2.0 / den) * (d * g);
  };
  auto polished = projected_concave_ascent(true_value, grad, project_unit_modulus, gamma,
                                           ctx.ascent(std::abs(true_value(gamma))));
  if (polished.hit_max_iters) ++ctx.ascent_cap_hits;
  return polished.value >= true_value(gamma) ? polished.x : gamma;
}

// ---- power steps ----

RVec power_step_fixed_filters(const Allocation& cur, Context& ctx, int* iterations) {
  const auto& cfg = ctx.cfg;
  const auto coeffs = surrogates::build_power_coeffs(cur.gamma, cur.filters, ctx.ch, cfg);
  auto project = [&](const RVec& p) {
    return project_power_feasible(p, cfg.p_max_w, coeffs.rf_slope, coeffs.rf_offset,
                                  cfg.pr_max_w);
  };
  auto true_value = [&](const RVec& p) { return surrogates::power_gee(p, coeffs); };
  RVec pbar = project(cur.p);
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    auto num = [&](const RVec& p) { return surrogates::power_dc_numerator(p, pbar, coeffs); };
    auto den = [&](const RVec& p) { return coeffs.slope.dot(p) + coeffs.offset; };
    auto grad = [&](const RVec& p, double lambda) -> RVec {
      return surrogates::power_dc_numerator_gradient(p, pbar, coeffs) - lambda * coeffs.slope;
    };
    const auto res = ctx.fractional(num, den, grad, project, pbar);
    ++*iterations;
    const double before = true_value(pbar);
    double after = true_value(res.x);
    if (after >= before) {
      pbar = extrapolate(pbar, res.x, after, true_value, project, ctx.opts.max_extrapolation,
                         &after);
    }
    if (ctx.settled(before, after)) break;
  }
  return pbar;
}

RVec power_step_mmse(const Allocation& cur, Context& ctx, int* iterations) {
  const auto& ch = ctx.ch;
  const auto& cfg = ctx.cfg;
  const auto coeffs = surrogates::build_power_coeffs(cur.gamma, cur.filters, ch, cfg);
  auto project = [&](const RVec& p) {
    return project_power_feasible(p, cfg.p_max_w, coeffs.rf_slope, coeffs.rf_offset,
                                  cfg.pr_max_w);
  };
  auto true_value = [&](const RVec& p) { return normalized_gee_mmse(cur.gamma, p, ch, cfg); };
  RVec pbar = project(cur.p);
  for (int t = 0; t < ctx.opts.max_sequential; ++t) {
    const double f_bar = surrogates::f_power(pbar, cur.gamma, ch, cfg);
    const RVec f_grad = surrogates::grad_f_power(pbar, cur.gamma, ch, cfg);
    auto num = [&](const RVec& p) {
      return surrogates::h_power(p, cur.gamma, ch, cfg) - f_bar - f_grad.dot(p - pbar);
    };
    auto den = [&](const RVec& p) { return coeffs.slope.dot(p) + coeffs.offset; };
    auto grad = [&](const RVec& p, double lambda) -> RVec {
      return surrogates::grad_h_power(p, cur.gamma, ch, cfg) - f_grad - lambda * coeffs.slope;
    };
    const auto res = ctx.fractional(num, den, grad, project, pbar);
    ++*iterations;
    const double before = true_value(pbar);
    double after = true_value(res.x);
    if (after >= before) {
      pbar = extrapolate(pbar, res.x, after, true_value, project, ctx.opts.max_extrapolation,
                         &after);
    }
    if (ctx.settled(before, after)) break;
  }
  return pbar;
}

// ---- outer loop ----

constexpr int kAndersonMemory = 5;

// Anderson mixing for the fixed-point map x -> F(x): real coefficients summing
// to one that minimize the norm of the combined residual F(x_i) - x_i, applied
// to the outputs. Complex vectors are treated as real pairs.
std::optional<CVec> anderson_mix(const std::vector<CVec>& inputs, const std::vector<CVec>& outputs) {
  const std::size_t m = inputs.size();
  if (m < 2) return std::nullopt;
  const Eigen::Index n = inputs.front().size();
  auto stacked = [&](const CVec& v) {
    RVec out(2 * n);
    out << v.real(), v.imag();
    return out;
  };
  const RVec f_last = stacked(outputs[m - 1] - inputs[m - 1]);
  RMat df(2 * n, static_cast<Eigen::Index>(m - 1));
  for (std::size_t i = 0; i + 1 < m; ++i) {
    df.col(static_cast<Eigen::Index>(i)) = f_last - stacked(outputs[i] - inputs[i]);
  }
  const RVec theta = df.colPivHouseholderQr().solve(f_last);
  if (!theta.allFinite()) return std::nullopt;
  CVec mixed = outputs[m - 1];
  for (std::size_t i = 0; i + 1 < m; ++i) {
    mixed -= theta(static_cast<Eigen::Index>(i)) * (outputs[m - 1] - outputs[i]);
  }
  return mixed;
}

enum class GammaKind { kFixedFilters, kLifted, kPhasesFixedFilters, kPhasesMmse };

struct Plan {
  std::string tag;
  GammaKind gamma;
  bool mmse_embedded;  // method 2 objective (filters recomputed inside evaluation)
};

SolveReport run(const Plan& plan, const ChannelSet& ch, const ScenarioConfig& cfg,
                const Allocation& init, const SolverOptions& opts) {
  opts.validate();
  ch.check(cfg);
  const auto t_start = Clock::now();
  Context ctx{ch, cfg, opts, Rng(Rng::derive(opts.seed, 0x72616e6bULL))};
  SolveReport report;
  report.method = plan.tag;

  Allocation cur = init;
  cur.filters = model::mmse_filters(cur.gamma, cur.p, ch, cfg);
  auto evaluate = [&](const Allocation& a) {
    return plan.mmse_embedded ? normalized_gee_mmse(a.gamma, a.p, ch, cfg)
                              : normalized_gee(a, ch, cfg);
  };
  auto refresh_filters = [&]() {
    const auto t0 = Clock::now();
    cur.filters = staged("filter step", [&] { return model::mmse_filters(cur.gamma, cur.p, ch, cfg); });
    report.times.filter_s += seconds_since(t0);
  };

  double value = staged("initial point", [&] { return evaluate(cur); });
  report.gee_trajectory.push_back(value * cfg.bandwidth_hz);

  std::vector<CVec> inputs;
  std::vector<CVec> outputs;
  for (int it = 0; it < opts.max_outer; ++it) {
    const double start = value;
    const CVec step_input = cur.gamma;

    auto t0 = Clock::now();
    const CVec gamma_new = staged("gamma step", [&] {
      switch (plan.gamma) {
        case GammaKind::kFixedFilters:
          return gamma_step_fixed_filters(cur, ctx, &report.gamma_iterations);
        case GammaKind::kLifted:
          return gamma_step_lifted(cur, ctx, &report.gamma_iterations);
        case GammaKind::kPhasesFixedFilters:
          return gamma_step_phases_fixed_filters(cur, ctx, &report.gamma_iterations);
        case GammaKind::kPhasesMmse:
          break;
      }
      return gamma_step_phases_mmse(cur, ctx, &report.gamma_iterations);
    });
    {
      Allocation cand = cur;
      cand.gamma = gamma_new;
      const double v = staged("gamma step", [&] { return evaluate(cand); });
      if (v >= value) {
        cur.gamma = gamma_new;
        value = v;
      }
    }
    report.times.gamma_s += seconds_since(t0);
    refresh_filters();
    value = staged("filter step", [&] { return evaluate(cur); });

    t0 = Clock::now();
    const RVec p_new = staged("power step", [&] {
      return plan.mmse_embedded ? power_step_mmse(cur, ctx, &report.power_iterations)
                                : power_step_fixed_filters(cur, ctx, &report.power_iterations);
    });
    {
      Allocation cand = cur;
      cand.p = p_new;
      const double v = staged("power step", [&] { return evaluate(cand); });
      if (v >= value) {
        cur.p = p_new;
        value = v;
      }
    }
    report.times.power_s += seconds_since(t0);
    refresh_filters();
    value = staged("filter step", [&] { return evaluate(cur); });

    // Block updates stall along directions that couple gamma with the
    // filters. The outer map is accelerated on gamma by Anderson mixing over
    // the last few outer steps, then by a doubling walk along the last
    // displacement; either is kept only when the GEE with MMSE filters
    // improves.
    if (opts.max_extrapolation > 0) {
      const bool passive = plan.gamma == GammaKind::kPhasesFixedFilters ||
                           plan.gamma == GammaKind::kPhasesMmse;
      const RVec r = model::matrix_r(cur.p, ch, cfg);
      auto project = [&](const CVec& g) {
        return passive ? project_unit_modulus(g) : fit_band(g, r, cfg.pr_max_w);
      };
      auto mmse_value = [&](const CVec& g) { return normalized_gee_mmse(g, cur.p, ch, cfg); };
      inputs.push_back(step_input);
      outputs.push_back(cur.gamma);
      if (static_cast<int>(inputs.size()) > kAndersonMemory + 1) {
        inputs.erase(inputs.begin());
        outputs.erase(outputs.begin());
      }
      double best = value;
      CVec best_gamma = cur.gamma;
      if (const auto mixed = anderson_mix(inputs, outputs)) {
        const CVec cand = project(*mixed);
        try {
          const double v = mmse_value(cand);
          if (v > best) {
            best = v;
            best_gamma = cand;
          }
        } catch (const std::runtime_error&) {
        }
      }
      double extended = best;
      const CVec g = extrapolate(step_input, best_gamma, best, mmse_value, project,
                                 opts.max_extrapolation, &extended);
      if (extended > best) {
        best = extended;
        best_gamma = g;
      }
      if (best > value) {
        cur.gamma = best_gamma;
        refresh_filters();
        value = staged("filter step", [&] { return evaluate(cur); });
      }
    }

    report.outer_iterations = it + 1;
    report.gee_trajectory.push_back(value * cfg.bandwidth_hz);
    if (std::abs(value - start) < opts.tol_outer) {
      report.converged = true;
      break;
    }
  }

  report.allocation = cur;
  report.final = model::gee(cur, ch, cfg);
  report.residuals = audit(cur, ch, cfg);
  report.residuals.psd_min_eig = ctx.last_psd_min_eig;
  report.residuals.rank_ratio = ctx.last_rank_ratio;
  if (!report.converged) {
    report.warnings.push_back("outer loop stopped at " + std::to_string(opts.max_outer) +
                              " iterations before meeting the tolerance");
  }
  if (ctx.ascent_cap_hits > 0) {
    report.warnings.push_back("inner ascent hit its iteration cap " +
                              std::to_string(ctx.ascent_cap_hits) + " times");
  }
  if (ctx.dinkelbach_cap_hits > 0) {
    report.warnings.push_back("Dinkelbach loop hit its iteration cap " +
                              std::to_string(ctx.dinkelbach_cap_hits) + " times");
  }
  report.times.total_s = seconds_since(t_start);
  return report;
}

}  // namespace

SolveReport method1_solve(const ChannelSet& ch, const ScenarioConfig& cfg, const Allocation& init,
                          const SolverOptions& opts) {
  return run({"method1", GammaKind::kFixedFilters, false}, ch, cfg, init, opts);
}

SolveReport method2_solve(const ChannelSet& ch, const ScenarioConfig& cfg, const Allocation& init,
                          const SolverOptions& opts) {
  return run({"method2", GammaKind::kLifted, true}, ch, cfg, init, opts);
}

SolveReport solve(Method method, const ChannelSet& ch, const ScenarioConfig& cfg,
                  const Allocation& init, const SolverOptions& opts) {
  return method == Method::kAlternating ? method1_solve(ch, cfg, init, opts)
                                        : method2_solve(ch, cfg, init, opts);
}

SolveReport passive_solve(const ChannelSet& ch, const ScenarioConfig& cfg, Method method,
                          const SolverOptions& opts) {
  const ScenarioConfig pcfg = passive_variant(cfg);
  const Allocation init = default_init(ch, pcfg);
  SolveReport report =
      method == Method::kAlternating
          ? run({"passive-method1", GammaKind::kPhasesFixedFilters, false}, ch, pcfg, init, opts)
          : run({"passive-method2", GammaKind::kPhasesMmse, true}, ch, pcfg, init, opts);
  return report;
}

SolveReport sum_rate_mode(const ChannelSet& ch, const ScenarioConfig& cfg, Method method,
                          const SolverOptions& opts) {
  const ScenarioConfig sr_cfg = sum_rate_variant(cfg);
  SolveReport report = solve(method, ch, sr_cfg, default_init(ch, sr_cfg), opts);
  report.method += "-sr";
  report.final = model::gee(report.allocation, ch, cfg);
  report.post_hoc_gee = report.final.gee_bits_per_joule;
  return report;
}

}  // namespace risgee::solvers
