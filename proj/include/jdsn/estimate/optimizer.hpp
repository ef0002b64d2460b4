#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/parameters.hpp"
#include "jdsn/types.hpp"

namespace jdsn::estimate {

struct NelderMeadOptions {
  int starts = 8;
  int max_iterations = 2000;
  double diameter_tol = 1e-9;
  double initial_step = 0.1;  // fraction of the box width
  double reflect = 1.0;
  double expand = 2.0;
  double contract = 0.5;
  double shrink = 0.5;
  bool polish = true;
  int polish_iterations = 50;
};

struct OptimizeResult {
  Vector argmax;
  double value = -std::numeric_limits<double>::infinity();
  double center_value = -std::numeric_limits<double>::infinity();
  int iterations = 0;  // summed over starts
  int restarts = 0;    // starts run beyond the first
  int best_start = 0;
  bool hit_tolerance = false;
  bool converged = false;
};

using Objective = std::function<double(const Vector&)>;
using GradientFn = std::function<Vector(const Vector&)>;
using HessianFn = std::function<Matrix(const Vector&)>;

/// Radical inverse of i in the given base.
inline double radical_inverse(std::size_t i, unsigned base) {
  double inv = 1.0 / base, f = inv, out = 0.0;
  while (i > 0) {
    out += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return out;
}

/// Point i (i >= 1) of the Halton sequence in [0, 1]^dim.
inline Vector halton_point(std::size_t i, std::size_t dim) {
  static constexpr unsigned kPrimes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};
  if (dim > std::size(kPrimes)) fail(ErrorKind::Configuration, "too many free parameters");
  Vector u(static_cast<Eigen::Index>(dim));
  for (std::size_t j = 0; j < dim; ++j) u[static_cast<Eigen::Index>(j)] = radical_inverse(i, kPrimes[j]);
  return u;
}

/// Start points: the domain center, then Halton points mapped into the box.
inline std::vector<Vector> start_points(const model::ParameterDomain& box, int count) {
  std::vector<Vector> out;
  out.push_back(box.center());
  for (int i = 1; i < count; ++i) {
    const Vector u = halton_point(static_cast<std::size_t>(i), box.dim());
    out.push_back(box.clamp_inside(box.lower.array() + u.array() * (box.upper - box.lower).array(),
                                   1e-3));
  }
  return out;
}

namespace detail {

inline double safe_eval(const Objective& f, const Vector& x) {
  double v;
  try {
    v = f(x);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Configuration) throw;
    return -std::numeric_limits<double>::infinity();
  }
  return std::isfinite(v) ? v : -std::numeric_limits<double>::infinity();
}

struct RunResult {
  Vector x;
  double value;
  int iterations;
  bool hit_tolerance;
};

// Maximises f over the open box; vertices are clamped inside.
inline RunResult nelder_mead(const Objective& f, const model::ParameterDomain& box,
                             const Vector& start, const NelderMeadOptions& o) {
  const auto d = start.size();
  const auto clamp = [&](const Vector& v) { return box.clamp_inside(v); };
  std::vector<Vector> pts;
  std::vector<double> val;
  pts.push_back(clamp(start));
  for (Eigen::Index j = 0; j < d; ++j) {
    Vector p = pts[0];
    const double step = o.initial_step * (box.upper[j] - box.lower[j]);
    p[j] = (p[j] + step < box.upper[j]) ? p[j] + step : p[j] - step;
    pts.push_back(clamp(p));
  }
  for (const auto& p : pts) val.push_back(safe_eval(f, p));

  std::vector<std::size_t> order(pts.size());
  const auto sort_vertices = [&] {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return val[a] > val[b]; });
    std::vector<Vector> p2;
    std::vector<double> v2;
    for (auto i : order) {
      p2.push_back(pts[i]);
      v2.push_back(val[i]);
    }
    pts.swap(p2);
    val.swap(v2);
  };
  const auto diameter = [&] {
    double dmax = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
      const Vector scaled = ((pts[i] - pts[0]).array() / (box.upper - box.lower).array()).matrix();
      dmax = std::max(dmax, scaled.lpNorm<Eigen::Infinity>());
    }
    return dmax;
  };

  int it = 0;
  bool tol = false;
  sort_vertices();
  const auto last = static_cast<std::size_t>(d);
  for (; it < o.max_iterations; ++it) {
    if (diameter() < o.diameter_tol) {
      tol = true;
      break;
    }
    Vector centroid = Vector::Zero(d);
    for (std::size_t i = 0; i < last; ++i) centroid += pts[i];
    centroid /= static_cast<double>(d);

    const Vector xr = clamp(centroid + o.reflect * (centroid - pts[last]));
    const double fr = safe_eval(f, xr);
    if (fr > val[0]) {
      const Vector xe = clamp(centroid + o.expand * (xr - centroid));
      const double fe = safe_eval(f, xe);
      if (fe > fr) {
        pts[last] = xe;
        val[last] = fe;
      } else {
        pts[last] = xr;
        val[last] = fr;
      }
    } else if (fr > val[last - 1]) {
      pts[last] = xr;
      val[last] = fr;
    } else {
      const bool outside = fr > val[last];
      const Vector xc = outside ? clamp(centroid + o.contract * (xr - centroid))
                                : clamp(centroid + o.contract * (pts[last] - centroid));
      const double fc = safe_eval(f, xc);
      if (outside ? fc >= fr : fc > val[last]) {
        pts[last] = xc;
        val[last] = fc;
      } else {
        for (std::size_t i = 1; i < pts.size(); ++i) {
          pts[i] = clamp(pts[0] + o.shrink * (pts[i] - pts[0]));
          val[i] = safe_eval(f, pts[i]);
        }
      }
    }
    sort_vertices();
  }
  return {pts[0], val[0], it, tol};
}

// Newton steps where the Hessian is negative definite, gradient steps
// otherwise; each step backtracks until the objective improves.
inline void polish(const Objective& f, const GradientFn& grad, const HessianFn& hess,
                   const model::ParameterDomain& box, Vector& x, double& fx, int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    Vector g;
    Matrix h;
    try {
      g = grad(x);
      h = hess(x);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::Configuration) throw;
      return;
    }
    if (!g.allFinite() || !h.allFinite()) return;
    Vector step;
    Eigen::LLT<Matrix> llt(-h);
    if (llt.info() == Eigen::Success) {
      step = llt.solve(g);
    } else {
      step = g * (0.01 * (box.upper - box.lower).minCoeff() / std::max(g.norm(), 1e-300));
    }
    double t = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, t *= 0.5) {
      const Vector xn = box.clamp_inside(x + t * step);
      const double fn = safe_eval(f, xn);
      if (fn > fx) {
        moved = (xn - x).cwiseAbs().maxCoeff() > 0.0;
        x = xn;
        fx = fn;
        break;
      }
    }
    if (!moved) return;
    if ((t * step).cwiseAbs().maxCoeff() < 1e-14 * std::max(1.0, x.cwiseAbs().maxCoeff())) return;
  }
}

}  // namespace detail

/// Multi-start box-constrained maximisation. Starts run in index order and
/// ties keep the lowest index, so the result is deterministic.
inline OptimizeResult maximize_box(const Objective& f, const model::ParameterDomain& box,
                                   const NelderMeadOptions& opts = {},
                                   const GradientFn& grad = nullptr,
                                   const HessianFn& hess = nullptr) {
  box.validate();
  if (opts.starts < 1) fail(ErrorKind::Configuration, "optimizer needs at least one start");
  OptimizeResult out;
  const auto starts = start_points(box, opts.starts);
  out.center_value = detail::safe_eval(f, starts[0]);
  out.argmax = starts[0];
  out.value = out.center_value;
  bool best_tol = false;
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const auto r = detail::nelder_mead(f, box, starts[i], opts);
    out.iterations += r.iterations;
    if (r.value > out.value || (i == 0 && r.value >= out.value)) {
      out.value = r.value;
      out.argmax = r.x;
      out.best_start = static_cast<int>(i);
      best_tol = r.hit_tolerance;
    }
  }
  out.restarts = static_cast<int>(starts.size()) - 1;
  if (opts.polish && grad && hess && std::isfinite(out.value)) {
    detail::polish(f, grad, hess, box, out.argmax, out.value, opts.polish_iterations);
  }
  out.argmax = box.clamp_inside(out.argmax);
  out.hit_tolerance = best_tol;
  out.converged = best_tol && out.value > out.center_value;
  return out;
}

}  // namespace jdsn::estimate
