// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <vector>

#include "risgee/common.hpp"

namespace risgee::solvers {

struct AscentOptions {
  double tol = 1e-9;          // ascent stops after two gains <= tol * (|f| + value_scale)
  double value_scale = 1.0;
  int max_iters = 500;
  double armijo = 1e-4;       // sufficient-increase constant
  double backtrack = 0.5;     // step shrink factor
  double initial_step = 0.0;  // <= 0: pick 1/||grad(x0)||
  double min_step = 1e-300;
};

template <typename Point>
struct AscentResult {
  Point x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool hit_max_iters = false;  // best-so-far returned, caller may warn
  double last_step = 0.0;
};

/// Projected gradient ascent for a concave objective over a convex set.
///
/// Trial steps start from a Barzilai-Borwein estimate and are halved until the
/// Armijo condition f(y) >= f(x) + armijo <g, y - x> holds, so accepted
/// iterates never decrease the objective. `gradient` returns the ascent
/// direction in the same space as the point (for complex variables, twice
/// the conjugate Wirtinger derivative), paired with Re<., .>.
template <typename Point, typename Objective, typename Gradient, typename Projection>
AscentResult<Point> projected_concave_ascent(Objective&& objective, Gradient&& gradient,
                                             Projection&& project, const Point& x0,
                                             const AscentOptions& opts) {
  AscentResult<Point> out;
  Point x = project(x0);
  double f = objective(x);
  Point g = gradient(x);
  double step = opts.initial_step;
  int small_gains = 0;
  if (!(step > 0.0)) {
    const double gn = std::sqrt(inner_real(g, g));
    step = gn > 0.0 ? 1.0 / gn : 1.0;
  }

  for (int it = 0; it < opts.max_iters; ++it) {
    Point y;
    double fy = 0.0;
    double predicted = 0.0;
    bool accepted = false;
    while (step >= opts.min_step) {
      y = project(Point(x + step * g));
      predicted = inner_real(g, Point(y - x));
      if (predicted <= 0.0) {
        // Projected step does not move (stationary up to roundoff).
        break;
      }
      fy = objective(y);
      if (fy >= f + opts.armijo * predicted) {
        accepted = true;
        break;
      }
      step *= opts.backtrack;
    }
    out.iterations = it + 1;
    if (!accepted) {
      out.converged = true;
      break;
    }
    const Point s = y - x;
    const Point g_new = gradient(y);
    const double gain = fy - f;
    x = y;
    f = fy;
    // Barzilai-Borwein step for the next trial; for ascent the curvature is
    // -<s, g_new - g>.
    const double curvature = -inner_real(s, Point(g_new - g));
    g = g_new;
    if (curvature > 0.0) {
      step = inner_real(s, s) / curvature;
    } else {
      step *= 2.0;
    }
    small_gains = gain <= opts.tol * (std::abs(f) + opts.value_scale) ? small_gains + 1 : 0;
    if (small_gains >= 2) {
      out.converged = true;
      break;
    }
  }
  out.hit_max_iters = !out.converged;
  out.x = std::move(x);
  out.value = f;
  out.last_step = step;
  return out;
}

template <typename Point>
struct DinkelbachResult {
  Point x;
  double ratio = 0.0;
  int iterations = 0;
  bool converged = false;
  double residual = 0.0;         // F(lambda) at termination
  std::vector<double> lambdas;  // ratio after each accepted update
};

/// Dinkelbach's method for max num(x) / den(x) with num concave and den > 0
/// convex. `inner(lambda, warm)` must return a feasible maximizer (or any
/// feasible point not worse than `warm`) of num - lambda * den.
/// Terminates once F(lambda) = num - lambda den <= tol at the inner solution.
template <typename Point, typename Num, typename Den, typename Inner>
DinkelbachResult<Point> dinkelbach(Num&& num, Den&& den, Inner&& inner, const Point& x0,
                                   double tol, int max_iters) {
  DinkelbachResult<Point> out;
  Point x = x0;
  double d = den(x);
  if (!(d > 0.0)) throw NumericalError("dinkelbach: denominator is not positive");
  double lambda = num(x) / d;
  out.lambdas.push_back(lambda);
  for (int it = 0; it < max_iters; ++it) {
    Point cand = inner(lambda, x);
    const double dc = den(cand);
    if (!(dc > 0.0)) throw NumericalError("dinkelbach: denominator is not positive");
    const double nc = num(cand);
    const double residual = nc - lambda * dc;
    out.iterations = it + 1;
    out.residual = residual;
    if (residual <= tol) {
      if (residual > 0.0) {
        x = std::move(cand);
        lambda = nc / dc;
        out.lambdas.push_back(lambda);
      }
      out.converged = true;
      break;
    }
    x = std::move(cand);
    lambda = nc / dc;
    out.lambdas.push_back(lambda);
  }
  out.x = std::move(x);
  out.ratio = lambda;
  return out;
}

}  // namespace risgee::solvers
