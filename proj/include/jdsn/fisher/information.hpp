#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "jdsn/error.hpp"
#include "jdsn/estimate/contrast.hpp"
#include "jdsn/estimate/filter.hpp"
#include "jdsn/model/density.hpp"
#include "jdsn/model/model_spec.hpp"
#include "jdsn/numerics/quadrature.hpp"
#include "jdsn/simulate/limit_path.hpp"
#include "jdsn/simulate/rng.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::fisher {

/// Controls for the integral over jump sizes.
struct QuadSpec {
  double tail_mass = 1e-14;  // mass dropped from each tail
  double tol = 1e-11;        // absolute tolerance per entry
  int max_depth = 40;
  int panels = 64;           // equal sub-ranges each integrated adaptively
};

/// Block-diagonal asymptotic information of (mu, sigma, alpha).
struct FisherInformation {
  Matrix I1;
  Matrix I2;
  Matrix I3;

  Eigen::Index d1() const { return I1.rows(); }
  Eigen::Index d2() const { return I2.rows(); }
  Eigen::Index d3() const { return I3.rows(); }

  Matrix assembled() const {
    const auto d = d1() + d2() + d3();
    Matrix out = Matrix::Zero(d, d);
    out.block(0, 0, d1(), d1()) = I1;
    out.block(d1(), d1(), d2(), d2()) = I2;
    out.block(d1() + d2(), d1() + d2(), d3(), d3()) = I3;
    return out;
  }
};

/// Integration range in the variable actually integrated over: z itself on
/// the whole line, u = log z on the half line.
struct JumpRange {
  double lo = 0.0;
  double hi = 0.0;
  bool log_scale = false;
};

namespace detail {

// Density of the integration variable.
inline double transformed_density(const model::JumpDensityFamily& fam, const Vector& alpha,
                                  double u, bool log_scale) {
  if (!log_scale) return model::density_pdf(fam, alpha, u);
  const double z = std::exp(u);
  if (z == 0.0 || !std::isfinite(z)) return 0.0;
  return model::density_pdf(fam, alpha, z) * z;
}

}  // namespace detail

/// Truncation points with at most `tail_mass` beyond each end, found by
/// bisection on numerically integrated tails.
inline JumpRange jump_integration_range(const model::JumpDensityFamily& fam, const Vector& alpha,
                                        const QuadSpec& q) {
  const auto p = fam.native(alpha);
  model::require_admissible(fam.kind, p);
  JumpRange r;
  r.log_scale = fam.support == model::SupportKind::PositiveHalfLine;
  const double mean = model::family_mean(fam.kind, p);
  const double sd = model::family_sd(fam.kind, p);
  double center = mean, scale = sd;
  if (r.log_scale) {
    const double s2 = std::log1p(sd * sd / (mean * mean));
    center = std::log(mean) - 0.5 * s2;
    scale = std::max(std::sqrt(s2), 1e-3);
  }
  const auto g = [&](double u) { return detail::transformed_density(fam, alpha, u, r.log_scale); };
  const double g_center = g(center);

  // Far points where the density is negligible even after widening.
  const auto far_point = [&](double dir) {
    double step = scale;
    for (int k = 0; k < 200; ++k, step *= 1.5) {
      const double u = center + dir * step;
      if (g(u) * step < 1e-6 * q.tail_mass * std::max(g_center * scale, 1e-300) &&
          g(u + dir * step * 0.25) <= g(u)) {
        return u;
      }
    }
    fail(ErrorKind::Quadrature, "could not bracket the tail of the " +
                                    std::string(model::family_id(fam.kind)) + " density");
  };
  const double lo_far = far_point(-1.0);
  const double hi_far = far_point(+1.0);

  numerics::AdaptiveSimpson quad(q.tail_mass * 1e-3, q.max_depth);
  const auto tail_integral = [&](double a, double b) {
    double acc = 0.0;
    const int pieces = 16;
    for (int i = 0; i < pieces; ++i) {
      const double x0 = a + (b - a) * i / pieces, x1 = a + (b - a) * (i + 1) / pieces;
      acc += quad.integrate_scalar(g, x0, x1);
    }
    return acc;
  };
  // Upper: smallest T with mass(T, hi_far) <= tail_mass.
  double a = center, b = hi_far;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    (tail_integral(m, hi_far) > q.tail_mass ? a : b) = m;
  }
  r.hi = b;
  a = lo_far;
  b = center;
  for (int it = 0; it < 60; ++it) {
    const double m = 0.5 * (a + b);
    (tail_integral(lo_far, m) > q.tail_mass ? b : a) = m;
  }
  r.lo = a;
  return r;
}

/// Integral of h(z) f_alpha(z) dz over the truncated support; h is
/// vector-valued and evaluated only inside the support.
inline Vector integrate_against_density(const model::JumpDensityFamily& fam, const Vector& alpha,
                                        const std::function<Vector(double)>& h,
                                        const JumpRange& range, const QuadSpec& q) {
  numerics::AdaptiveSimpson quad(q.tol / q.panels, q.max_depth);
  const auto integrand = [&](double u) -> Vector {
    const double z = range.log_scale ? std::exp(u) : u;
    const double w = detail::transformed_density(fam, alpha, u, range.log_scale);
    Vector v = h(z);
    if (w == 0.0) return Vector::Zero(v.size());
    return v * w;
  };
  Vector acc;
  for (int i = 0; i < q.panels; ++i) {
    const double a = range.lo + (range.hi - range.lo) * i / q.panels;
    const double b = range.lo + (range.hi - range.lo) * (i + 1) / q.panels;
    Vector part;
    try {
      part = quad.integrate(integrand, a, b);
    } catch (const Error& e) {
      fail(ErrorKind::Quadrature, std::string(e.what()) + " (" +
                                      std::string(model::family_id(fam.kind)) +
                                      " jump density; derivative of psi is not integrable)");
    }
    acc = (i == 0) ? part : Vector(acc + part);
  }
  return acc;
}

/// Integral of d(psi)/d(alpha)(x, c(x) z, alpha0) f_alpha0(z) dz; zero
/// up to quadrature error for a correctly specified density.
inline Vector zero_score_integral(const model::ModelSpec& model, double x, const Vector& alpha0,
                                  const QuadSpec& q = {}) {
  const auto range = jump_integration_range(model.density, alpha0, q);
  const double c = model.jump_scale(x, alpha0);
  return integrate_against_density(
      model.density, alpha0,
      [&](double z) { return model::psi_derivatives(model, x, c * z, alpha0).dalpha; }, range, q);
}

/// Jump-size part of I3 at state x: E[dpsi dpsi^T] under f_alpha0.
inline Matrix jump_information_at(const model::ModelSpec& model, double x, const Vector& alpha0,
                                  const JumpRange& range, const QuadSpec& q) {
  const auto d3 = static_cast<Eigen::Index>(model.d3());
  const double c = model.jump_scale(x, alpha0);
  const Vector flat = integrate_against_density(
      model.density, alpha0,
      [&](double z) {
        const Vector g = model::psi_derivatives(model, x, c * z, alpha0).dalpha;
        const Matrix outer = g * g.transpose();
        return Vector(Eigen::Map<const Vector>(outer.data(), d3 * d3));
      },
      range, q);
  Matrix m = Eigen::Map<const Matrix>(flat.data(), d3, d3);
  return 0.5 * (m + m.transpose());
}

/// Asymptotic information along the limit path x_t. `time_steps` grid points
/// (odd) for composite Simpson in t.
inline FisherInformation fisher_information(const model::ModelSpec& model,
                                            const model::ParameterPoint& theta0,
                                            int time_steps = 101, const QuadSpec& q = {}) {
  model.require_point(theta0);
  if (time_steps < 3 || time_steps % 2 == 0) {
    fail(ErrorKind::Configuration, "time_steps must be odd and >= 3");
  }
  const auto path = simulate::solve_limit_path(model, theta0.mu, time_steps);
  const auto d1 = static_cast<Eigen::Index>(model.d1());
  const auto d2 = static_cast<Eigen::Index>(model.d2());
  const auto d3 = static_cast<Eigen::Index>(model.d3());
  const auto m = path.size();
  std::vector<Matrix> s1(m), s2(m), s3(m);
  const auto range = jump_integration_range(model.density, theta0.alpha, q);
  for (std::size_t i = 0; i < m; ++i) {
    const double x = path.values[i];
    const double b = model.diffusion(x, theta0.sigma);
    if (b == 0.0 || !std::isfinite(b)) {
      fail(ErrorKind::Evaluation, "diffusion coefficient vanishes on the limit path");
    }
    const Vector da = model.drift.gradient(x, theta0.mu);
    const Vector db = model.diffusion.gradient(x, theta0.sigma);
    s1[i] = da * da.transpose() / (b * b);
    s2[i] = 2.0 * db * db.transpose() / (b * b);
    s3[i] = jump_information_at(model, x, theta0.alpha, range, q);
  }
  const auto integrate_time = [&](const std::vector<Matrix>& s, Eigen::Index d) {
    Matrix out(d, d);
    std::vector<double> col(m);
    for (Eigen::Index r = 0; r < d; ++r) {
      for (Eigen::Index c = 0; c < d; ++c) {
        for (std::size_t i = 0; i < m; ++i) col[i] = s[i](r, c);
        out(r, c) = numerics::composite_simpson(col, 1.0);
      }
    }
    return out;
  };
  return {integrate_time(s1, d1), integrate_time(s2, d2), integrate_time(s3, d3)};
}

/// Monte Carlo version of I3: t uniform on [0, 1] (path interpolated
/// linearly), V from f_alpha0. Returns {mean, standard error}.
inline std::pair<Matrix, Matrix> sampled_jump_information(const model::ModelSpec& model,
                                                          const model::ParameterPoint& theta0,
                                                          std::size_t draws, std::uint64_t seed,
                                                          int time_steps = 1001) {
  model.require_point(theta0);
  const auto path = simulate::solve_limit_path(model, theta0.mu, time_steps);
  const auto d3 = static_cast<Eigen::Index>(model.d3());
  const auto p = model.density.native(theta0.alpha);
  rng::PhiloxEngine engine(seed, 0x1F15u);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Matrix sum = Matrix::Zero(d3, d3), sum2 = Matrix::Zero(d3, d3);
  const double h = 1.0 / static_cast<double>(path.size() - 1);
  for (std::size_t k = 0; k < draws; ++k) {
    const double t = unif(engine);
    const auto i = std::min(static_cast<std::size_t>(t / h), path.size() - 2);
    const double w = t / h - static_cast<double>(i);
    const double x = (1.0 - w) * path.values[i] + w * path.values[i + 1];
    const double v = model::sample_mark(model.density.kind, p, engine);
    const double c = model.jump_scale(x, theta0.alpha);
    const Vector g = model::psi_derivatives(model, x, c * v, theta0.alpha).dalpha;
    const Matrix o = g * g.transpose();
    sum += o;
    sum2 += o.cwiseProduct(o);
  }
  const double nd = static_cast<double>(draws);
  const Matrix mean = sum / nd;
  const Matrix var = (sum2 / nd - mean.cwiseProduct(mean)) * (nd / (nd - 1.0));
  return {mean, (var / nd).cwiseSqrt()};
}

/// Refuses information matrices whose smallest eigenvalue is below
/// 1e-10 times the largest.
inline void require_positive_definite(const Matrix& info) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (info + info.transpose()));
  const Vector ev = es.eigenvalues();
  const double mx = ev.cwiseAbs().maxCoeff();
  if (!(ev.minCoeff() >= 1e-10 * mx) || mx == 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "information matrix is singular or indefinite (eigenvalues %.3g .. %.3g)",
                  ev.minCoeff(), ev.maxCoeff());
    fail(ErrorKind::SingularInformation, buf);
  }
}

/// Observed information C(theta): Hessian blocks of the contrast with the
/// (mu, mu) and (mu, sigma) blocks scaled by eps^2 n. The (sigma, mu) block
/// is left unscaled and the jump block has no cross terms.
inline Matrix observed_information(const estimate::Contrast& psi,
                                   const model::ParameterPoint& theta) {
  const auto d1 = static_cast<Eigen::Index>(theta.d1());
  const auto d2 = static_cast<Eigen::Index>(theta.d2());
  const auto d3 = static_cast<Eigen::Index>(theta.d3());
  const double scale = psi.epsilon() * psi.epsilon() * static_cast<double>(psi.n());
  const Matrix h1 = psi.continuous_hessian(theta.mu, theta.sigma);
  Matrix out = Matrix::Zero(d1 + d2 + d3, d1 + d2 + d3);
  out.topLeftCorner(d1, d1) = scale * h1.topLeftCorner(d1, d1);
  out.block(0, d1, d1, d2) = scale * h1.topRightCorner(d1, d2);
  out.block(d1, 0, d2, d1) = h1.bottomLeftCorner(d2, d1);
  out.block(d1, d1, d2, d2) = h1.bottomRightCorner(d2, d2);
  out.bottomRightCorner(d3, d3) = psi.jump_hessian(theta.alpha);
  return out;
}

inline Matrix observed_information(const simulate::ObservationRecord& obs,
                                   const model::ParameterPoint& theta,
                                   const estimate::FilterLabels& labels,
                                   const model::ModelSpec& model, double lambda_for_scale) {
  return observed_information(estimate::Contrast(obs, labels, model, lambda_for_scale), theta);
}

/// Row-major CSV; the first line records where each block starts.
inline void write_matrix_csv(std::ostream& os, const Matrix& m, Eigen::Index d1, Eigen::Index d2,
                             Eigen::Index d3) {
  os << "# mu_offset=0,mu_dim=" << d1 << ",sigma_offset=" << d1 << ",sigma_dim=" << d2
     << ",alpha_offset=" << d1 + d2 << ",alpha_dim=" << d3 << '\n';
  char buf[32];
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", m(r, c));
      os << (c ? "," : "") << buf;
    }
    os << '\n';
  }
}

}  // namespace jdsn::fisher
