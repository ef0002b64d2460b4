#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>

#include "jdsn/error.hpp"
#include "jdsn/types.hpp"

namespace jdsn::numerics {

/// Vector-valued adaptive Simpson with Richardson correction. The error test
/// is on the max-norm of the component-wise estimate.
class AdaptiveSimpson {
 public:
  using Integrand = std::function<Vector(double)>;

  AdaptiveSimpson(double abs_tol, int max_depth = 48)
      : abs_tol_(abs_tol), max_depth_(max_depth) {}

  Vector integrate(const Integrand& f, double a, double b) {
    evaluations_ = 0;
    if (a == b) return Vector::Zero(call(f, a).size());
    const double m = 0.5 * (a + b);
    const Vector fa = call(f, a), fm = call(f, m), fb = call(f, b);
    const Vector whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return recurse(f, a, b, fa, fm, fb, whole, abs_tol_, max_depth_);
  }

  double integrate_scalar(const std::function<double(double)>& f, double a, double b) {
    return integrate([&f](double x) { return Vector::Constant(1, f(x)); }, a, b)[0];
  }

  std::size_t evaluations() const { return evaluations_; }

 private:
  Vector call(const Integrand& f, double x) {
    ++evaluations_;
    Vector v = f(x);
    if (!v.allFinite()) {
      fail(ErrorKind::Quadrature,
           "non-finite integrand value at " + std::to_string(x));
    }
    return v;
  }

  Vector recurse(const Integrand& f, double a, double b, const Vector& fa,
                 const Vector& fm, const Vector& fb, const Vector& whole,
                 double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const Vector flm = call(f, lm), frm = call(f, rm);
    const Vector left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const Vector right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const Vector delta = left + right - whole;
    if (depth <= 0 || delta.cwiseAbs().maxCoeff() <= 15.0 * tol) {
      return left + right + delta / 15.0;
    }
    return recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
  }

  double abs_tol_;
  int max_depth_;
  std::size_t evaluations_ = 0;
};

/// Composite Simpson over equally spaced samples on [0, span]; needs an odd
/// number of samples (even number of panels).
inline double composite_simpson(std::span<const double> values, double length) {
  const std::size_t n = values.size();
  if (n < 3 || n % 2 == 0) {
    fail(ErrorKind::Quadrature,
         "composite Simpson needs an odd sample count >= 3, got " + std::to_string(n));
  }
  const double h = length / static_cast<double>(n - 1);
  double acc = values[0] + values[n - 1];
  for (std::size_t i = 1; i + 1 < n; ++i) acc += (i % 2 == 1 ? 4.0 : 2.0) * values[i];
  return acc * h / 3.0;
}

}  // namespace jdsn::numerics
