#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/estimate/filter.hpp"
#include "jdsn/model/model_spec.hpp"
#include "jdsn/model/parameters.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::estimate {

/// Per-interval score contributions, one row per interval k = 1..n:
///   xi1 = eps^{-1} (dX - a/n) da/dmu / b^2                    on C
///   xi2 = -n^{-1/2} (1 - n (dX - a/n)^2 / (eps b)^2) db/dsigma / b   on C
///   xi3 = lambda^{-1/2} dpsi/dalpha(X, dX/eps, alpha)         on D
/// Column sums equal (eps n, sqrt(n), sqrt(lambda)) times the contrast gradient.
struct ScoreComponents {
  Matrix xi1;
  Matrix xi2;
  Matrix xi3;

  Vector column_sums() const {
    Vector out(xi1.cols() + xi2.cols() + xi3.cols());
    out << xi1.colwise().sum().transpose(), xi2.colwise().sum().transpose(),
        xi3.colwise().sum().transpose();
    return out;
  }
};

/// Quasi-log-likelihood Psi = Psi1(mu, sigma) + Psi2(alpha) with the data
/// split by filter label once up front.
class Contrast {
 public:
  Contrast(const simulate::ObservationRecord& obs, const FilterLabels& labels,
           const model::ModelSpec& model, double lambda_for_scale)
      : model_(&model), n_(obs.n), eps_(obs.epsilon), lambda_(lambda_for_scale) {
    if (obs.n < 2) {
      fail(ErrorKind::Configuration, "need at least two observation intervals");
    }
    if (labels.size() != static_cast<std::size_t>(obs.n)) {
      fail(ErrorKind::Configuration, "filter labels do not match the observations");
    }
    if (!(eps_ > 0.0)) fail(ErrorKind::Configuration, "epsilon must be positive");
    if (!(lambda_ > 0.0)) {
      fail(ErrorKind::Configuration, "lambda used to scale the jump contrast must be positive");
    }
    for (int k = 1; k <= obs.n; ++k) {
      const double xp = obs.values[static_cast<std::size_t>(k - 1)];
      const double dx = obs.increment(k);
      if (labels.is_jump(static_cast<std::size_t>(k - 1))) {
        jump_x_.push_back(xp);
        jump_y_.push_back(dx / eps_);
        jump_k_.push_back(k);
      } else {
        cont_x_.push_back(xp);
        cont_dx_.push_back(dx);
        cont_k_.push_back(k);
      }
    }
  }

  int n() const { return n_; }
  double epsilon() const { return eps_; }
  double lambda() const { return lambda_; }
  std::size_t continuous_count() const { return cont_x_.size(); }
  std::size_t jump_count() const { return jump_x_.size(); }

  double continuous(const Vector& mu, const Vector& sigma) const {
    const double n = static_cast<double>(n_);
    const double scale = n / (2.0 * eps_ * eps_);
    double acc = 0.0;
    for (std::size_t i = 0; i < cont_x_.size(); ++i) {
      const double x = cont_x_[i];
      const double b = model_->diffusion(x, sigma);
      if (b == 0.0 || !std::isfinite(b)) {
        fail(ErrorKind::Evaluation,
             "diffusion coefficient vanishes at X=" + std::to_string(x));
      }
      const double r = cont_dx_[i] - model_->drift(x, mu) / n;
      const double b2 = b * b;
      acc += scale * r * r / b2 + 0.5 * std::log(b2);
    }
    return -acc / n;
  }

  /// Intervals whose scaled increment leaves the support of f contribute 0.
  double jump(const Vector& alpha) const {
    double acc = 0.0;
    for (std::size_t i = 0; i < jump_x_.size(); ++i) {
      acc += model::psi(*model_, jump_x_[i], jump_y_[i], alpha);
    }
    return acc / lambda_;
  }

  double full(const model::ParameterPoint& theta) const {
    return continuous(theta.mu, theta.sigma) + jump(theta.alpha);
  }

  /// Gradient of Psi1 in (mu, sigma).
  Vector continuous_gradient(const Vector& mu, const Vector& sigma) const {
    const auto d1 = mu.size(), d2 = sigma.size();
    const double n = static_cast<double>(n_);
    Vector g = Vector::Zero(d1 + d2);
    for (std::size_t i = 0; i < cont_x_.size(); ++i) {
      const Terms t = terms(i, mu, sigma);
      g.head(d1) += t.r * t.da / (t.b * t.b);
      g.tail(d2) += (1.0 - n * t.r * t.r / (eps_ * eps_ * t.b * t.b)) * t.db / t.b;
    }
    g.head(d1) /= n * eps_ * eps_;
    g.tail(d2) *= -1.0 / n;
    return g;
  }

  /// Hessian of Psi1 in (mu, sigma).
  Matrix continuous_hessian(const Vector& mu, const Vector& sigma) const {
    const auto d1 = mu.size(), d2 = sigma.size();
    const double n = static_cast<double>(n_);
    const double e2 = eps_ * eps_;
    Matrix mm = Matrix::Zero(d1, d1), ms = Matrix::Zero(d1, d2), ss = Matrix::Zero(d2, d2);
    for (std::size_t i = 0; i < cont_x_.size(); ++i) {
      const Terms t = terms(i, mu, sigma);
      const double x = cont_x_[i];
      const double b2 = t.b * t.b;
      const Matrix daa = model_->drift.hessian(x, mu);
      const Matrix dbb = model_->diffusion.hessian(x, sigma);
      mm += (t.r * daa - t.da * t.da.transpose() / n) / b2;
      ms += -2.0 * t.r * t.da * t.db.transpose() / (b2 * t.b);
      const Matrix dlogb = dbb / t.b - t.db * t.db.transpose() / b2;  // d(b'/b)
      ss += -(1.0 - n * t.r * t.r / (e2 * b2)) / n * dlogb -
            2.0 / e2 * t.r * t.r * t.db * t.db.transpose() / (b2 * b2);
    }
    Matrix h(d1 + d2, d1 + d2);
    h.topLeftCorner(d1, d1) = mm / (n * e2);
    h.topRightCorner(d1, d2) = ms / (n * e2);
    h.bottomLeftCorner(d2, d1) = ms.transpose() / (n * e2);
    h.bottomRightCorner(d2, d2) = ss;
    return h;
  }

  Vector jump_gradient(const Vector& alpha) const {
    Vector g = Vector::Zero(alpha.size());
    for (std::size_t i = 0; i < jump_x_.size(); ++i) {
      if (!defined(i, alpha)) continue;
      g += model::psi_derivatives(*model_, jump_x_[i], jump_y_[i], alpha).dalpha;
    }
    return g / lambda_;
  }

  Matrix jump_hessian(const Vector& alpha) const {
    Matrix h = Matrix::Zero(alpha.size(), alpha.size());
    for (std::size_t i = 0; i < jump_x_.size(); ++i) {
      if (!defined(i, alpha)) continue;
      h += model::psi_derivatives(*model_, jump_x_[i], jump_y_[i], alpha).dalpha2;
    }
    return h / lambda_;
  }

  ScoreComponents score_components(const model::ParameterPoint& theta) const {
    const auto d1 = theta.mu.size(), d2 = theta.sigma.size(), d3 = theta.alpha.size();
    const double n = static_cast<double>(n_);
    ScoreComponents s;
    s.xi1 = Matrix::Zero(n_, d1);
    s.xi2 = Matrix::Zero(n_, d2);
    s.xi3 = Matrix::Zero(n_, d3);
    for (std::size_t i = 0; i < cont_x_.size(); ++i) {
      const Terms t = terms(i, theta.mu, theta.sigma);
      const Eigen::Index row = cont_k_[i] - 1;
      s.xi1.row(row) = (t.r * t.da / (eps_ * t.b * t.b)).transpose();
      s.xi2.row(row) = (-(1.0 - n * t.r * t.r / (eps_ * eps_ * t.b * t.b)) * t.db /
                        (t.b * std::sqrt(n)))
                           .transpose();
    }
    const double root_lambda = std::sqrt(lambda_);
    for (std::size_t i = 0; i < jump_x_.size(); ++i) {
      if (!defined(i, theta.alpha)) continue;
      const Eigen::Index row = jump_k_[i] - 1;
      s.xi3.row(row) =
          (model::psi_derivatives(*model_, jump_x_[i], jump_y_[i], theta.alpha).dalpha /
           root_lambda)
              .transpose();
    }
    return s;
  }

 private:
  struct Terms {
    double r;
    double b;
    Vector da;
    Vector db;
  };

  Terms terms(std::size_t i, const Vector& mu, const Vector& sigma) const {
    const double x = cont_x_[i];
    const double b = model_->diffusion(x, sigma);
    if (b == 0.0 || !std::isfinite(b)) {
      fail(ErrorKind::Evaluation, "diffusion coefficient vanishes at X=" + std::to_string(x));
    }
    return {cont_dx_[i] - model_->drift(x, mu) / static_cast<double>(n_), b,
            model_->drift.gradient(x, mu), model_->diffusion.gradient(x, sigma)};
  }

  // psi takes its "otherwise" branch (and is locally constant) off the support.
  bool defined(std::size_t i, const Vector& alpha) const {
    const double c = model_->jump_scale(jump_x_[i], alpha);
    return c != 0.0 && std::isfinite(c) &&
           model::in_support_interior(model_->density.support, jump_y_[i] / c);
  }

  const model::ModelSpec* model_;
  int n_;
  double eps_;
  double lambda_;
  std::vector<double> cont_x_, cont_dx_;
  std::vector<int> cont_k_;
  std::vector<double> jump_x_, jump_y_;
  std::vector<int> jump_k_;
};

inline double contrast_continuous(const simulate::ObservationRecord& obs, const Vector& mu,
                                  const Vector& sigma, const FilterLabels& labels,
                                  const model::ModelSpec& model) {
  return Contrast(obs, labels, model, 1.0).continuous(mu, sigma);
}

inline double contrast_jump(const simulate::ObservationRecord& obs, const Vector& alpha,
                            const FilterLabels& labels, const model::ModelSpec& model,
                            double lambda_for_scale) {
  return Contrast(obs, labels, model, lambda_for_scale).jump(alpha);
}

inline double contrast_full(const simulate::ObservationRecord& obs,
                            const model::ParameterPoint& theta, const FilterLabels& labels,
                            const model::ModelSpec& model, double lambda_for_scale) {
  return Contrast(obs, labels, model, lambda_for_scale).full(theta);
}

inline ScoreComponents score_components(const simulate::ObservationRecord& obs,
                                        const model::ParameterPoint& theta,
                                        const FilterLabels& labels,
                                        const model::ModelSpec& model,
                                        double lambda_for_scale) {
  return Contrast(obs, labels, model, lambda_for_scale).score_components(theta);
}

}  // namespace jdsn::estimate
