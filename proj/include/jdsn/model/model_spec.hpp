#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "jdsn/error.hpp"
#include "jdsn/model/density.hpp"
#include "jdsn/model/parameters.hpp"
#include "jdsn/types.hpp"

namespace jdsn::model {

/// A scalar coefficient g(x, p) with its gradient and Hessian in p.
struct CoefficientFunction {
  std::size_t dim = 0;
  std::function<double(double, const Vector&)> value;
  std::function<Vector(double, const Vector&)> gradient;
  std::function<Matrix(double, const Vector&)> hessian;

  double operator()(double x, const Vector& p) const { return value(x, p); }
};

/// Coefficient that ignores its parameters: g(x, p) = h(x).
inline CoefficientFunction state_only(std::size_t dim, std::function<double(double)> h) {
  CoefficientFunction f;
  f.dim = dim;
  f.value = [h](double x, const Vector&) { return h(x); };
  f.gradient = [dim](double, const Vector&) {
    return Vector::Zero(static_cast<Eigen::Index>(dim)).eval();
  };
  f.hessian = [dim](double, const Vector&) {
    const auto n = static_cast<Eigen::Index>(dim);
    return Matrix::Zero(n, n).eval();
  };
  return f;
}

inline CoefficientFunction constant_coefficient(std::size_t dim, double c) {
  return state_only(dim, [c](double) { return c; });
}

/// a(x, mu) = -mu[0] * x
inline CoefficientFunction ou_drift() {
  CoefficientFunction f;
  f.dim = 1;
  f.value = [](double x, const Vector& mu) { return -mu[0] * x; };
  f.gradient = [](double x, const Vector&) { return Vector::Constant(1, -x).eval(); };
  f.hessian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  return f;
}

/// a(x, mu) = mu[0]
inline CoefficientFunction constant_drift() {
  CoefficientFunction f;
  f.dim = 1;
  f.value = [](double, const Vector& mu) { return mu[0]; };
  f.gradient = [](double, const Vector&) { return Vector::Ones(1).eval(); };
  f.hessian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  return f;
}

/// b(x, sigma) = sigma[0]
inline CoefficientFunction constant_diffusion() {
  CoefficientFunction f;
  f.dim = 1;
  f.value = [](double, const Vector& s) { return s[0]; };
  f.gradient = [](double, const Vector&) { return Vector::Ones(1).eval(); };
  f.hessian = [](double, const Vector&) { return Matrix::Zero(1, 1).eval(); };
  return f;
}

/// c(x, alpha) = exp(alpha[slot] * tanh(x)); depends on one trailing alpha entry.
inline CoefficientFunction tanh_jump_scale(std::size_t dim, std::size_t slot) {
  CoefficientFunction f;
  f.dim = dim;
  const auto j = static_cast<Eigen::Index>(slot);
  const auto n = static_cast<Eigen::Index>(dim);
  f.value = [j](double x, const Vector& a) { return std::exp(a[j] * std::tanh(x)); };
  f.gradient = [j, n](double x, const Vector& a) {
    Vector g = Vector::Zero(n);
    const double t = std::tanh(x);
    g[j] = t * std::exp(a[j] * t);
    return g;
  };
  f.hessian = [j, n](double x, const Vector& a) {
    Matrix h = Matrix::Zero(n, n);
    const double t = std::tanh(x);
    h(j, j) = t * t * std::exp(a[j] * t);
    return h;
  };
  return f;
}

/// dX = a(X, mu) dt + eps b(X, sigma) dW + eps c(X-, alpha) dZ, X_0 = x0.
struct ModelSpec {
  std::string id;
  CoefficientFunction drift;       // a
  CoefficientFunction diffusion;   // b
  CoefficientFunction jump_scale;  // c
  JumpDensityFamily density;
  double x0 = 1.0;
  ParameterDomain domain;

  std::size_t d1() const { return drift.dim; }
  std::size_t d2() const { return diffusion.dim; }
  std::size_t d3() const { return jump_scale.dim; }
  std::size_t dim() const { return d1() + d2() + d3(); }

  void validate() const {
    if (!drift.value || !diffusion.value || !jump_scale.value) {
      fail(ErrorKind::Model, "model '" + id + "' is missing a coefficient function");
    }
    if (jump_scale.dim < density.alpha_dim()) {
      fail(ErrorKind::Model, "model '" + id +
                                 "': jump parameter dimension is smaller than the "
                                 "density's free parameter count");
    }
    domain.validate();
    if (domain.dim() != dim()) {
      fail(ErrorKind::Model, "model '" + id + "': domain dimension " +
                                 std::to_string(domain.dim()) + " != " +
                                 std::to_string(dim()));
    }
  }

  void require_point(const ParameterPoint& theta) const {
    if (theta.d1() != d1() || theta.d2() != d2() || theta.d3() != d3()) {
      fail(ErrorKind::ParameterDomain,
           "parameter point does not match the dimensions of model '" + id + "'");
    }
    if (!theta.finite()) {
      fail(ErrorKind::ParameterDomain, "parameter point has non-finite entries");
    }
  }
};

// ---------------------------------------------------------------------------
// psi(x, y, alpha) = log |f_alpha(y / c) / c| where defined, else 0.

inline double psi(const ModelSpec& model, double x, double y, const Vector& alpha) {
  const NativeParams p = model.density.native(alpha);
  require_admissible(model.density.kind, p);
  const double c = model.jump_scale(x, alpha);
  if (c == 0.0 || !std::isfinite(c)) return 0.0;
  const double z = y / c;
  if (!in_support_interior(model.density.support, z)) return 0.0;
  const double logf = detail::log_density(model.density.kind, p, z).value;
  if (!std::isfinite(logf)) return 0.0;  // f underflows to 0
  return logf - std::log(std::abs(c));
}

/// First and second derivatives of psi at one point.
struct PsiDerivatives {
  double value = 0.0;
  double dy = 0.0;
  Vector dalpha;     // d psi / d alpha_j
  Vector dy_dalpha;  // d^2 psi / dy d alpha_j
  Matrix dalpha2;    // d^2 psi / d alpha_i d alpha_j
};

namespace detail {

struct ScaledPoint {
  NativeParams p;
  double c;
  double z;
};

inline ScaledPoint scaled_point(const ModelSpec& model, double x, double y,
                                const Vector& alpha) {
  const NativeParams p = model.density.native(alpha);
  require_admissible(model.density.kind, p);
  const double c = model.jump_scale(x, alpha);
  if (c == 0.0 || !std::isfinite(c)) {
    fail(ErrorKind::BoundaryEvaluation, "jump scale c(x, alpha) vanishes at x=" +
                                            std::to_string(x));
  }
  const double z = y / c;
  if (!in_support_interior(model.density.support, z)) {
    fail(ErrorKind::BoundaryEvaluation,
         "psi derivative requested at y=" + std::to_string(y) +
             " on or outside the support boundary");
  }
  return {p, c, z};
}

}  // namespace detail

inline PsiDerivatives psi_derivatives(const ModelSpec& model, double x, double y,
                                      const Vector& alpha) {
  const auto [p, c, z] = detail::scaled_point(model, x, y, alpha);
  const auto g = log_density_derivatives(model.density, p, z);
  const auto d3 = static_cast<Eigen::Index>(model.d3());
  const auto nfree = static_cast<Eigen::Index>(model.density.alpha_dim());
  const auto slots = model.density.free_slots();

  // Density-parameter derivatives mapped onto alpha slots.
  Vector ga = Vector::Zero(d3), gza = Vector::Zero(d3);
  Matrix gaa = Matrix::Zero(d3, d3);
  for (Eigen::Index i = 0; i < nfree; ++i) {
    const auto si = slots[static_cast<std::size_t>(i)];
    ga[i] = g.dp[si];
    gza[i] = g.dzp[si];
    for (Eigen::Index j = 0; j < nfree; ++j) {
      gaa(i, j) = g.dpp[si][slots[static_cast<std::size_t>(j)]];
    }
  }

  const Vector cg = model.jump_scale.gradient(x, alpha);
  const Matrix ch = model.jump_scale.hessian(x, alpha);
  const Vector L = cg / c;                       // d log|c| / d alpha
  const Matrix M = ch / c - L * L.transpose();   // d L / d alpha

  PsiDerivatives out;
  out.value = g.value - std::log(std::abs(c));
  out.dy = g.dz / c;
  const double one_zgz = 1.0 + z * g.dz;
  out.dalpha = -L * one_zgz + ga;
  out.dy_dalpha = (-z * g.dzz * L + gza - g.dz * L) / c;
  // d(z g_z)/d alpha_k = -z L_k (g_z + z g_zz) + z g_za_k
  const Vector d_zgz = -z * (g.dz + z * g.dzz) * L + z * gza;
  out.dalpha2 = -M * one_zgz - L * d_zgz.transpose() - gza * (z * L).transpose() + gaa;
  out.dalpha2 = 0.5 * (out.dalpha2 + out.dalpha2.transpose()).eval();
  return out;
}

inline double psi_dy(const ModelSpec& model, double x, double y, const Vector& alpha) {
  const auto [p, c, z] = detail::scaled_point(model, x, y, alpha);
  return log_density_derivatives(model.density, p, z).dz / c;
}

inline Vector psi_dalpha(const ModelSpec& model, double x, double y,
                         const Vector& alpha) {
  return psi_derivatives(model, x, y, alpha).dalpha;
}

/// (d^2 psi / dy d alpha, d^2 psi / d alpha d alpha)
inline std::pair<Vector, Matrix> psi_d2(const ModelSpec& model, double x, double y,
                                        const Vector& alpha) {
  auto d = psi_derivatives(model, x, y, alpha);
  return {std::move(d.dy_dalpha), std::move(d.dalpha2)};
}

}  // namespace jdsn::model
