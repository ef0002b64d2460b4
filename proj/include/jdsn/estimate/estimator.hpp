#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "jdsn/error.hpp"
#include "jdsn/estimate/contrast.hpp"
#include "jdsn/estimate/filter.hpp"
#include "jdsn/estimate/optimizer.hpp"
#include "jdsn/model/model_spec.hpp"
#include "jdsn/model/regime.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::estimate {

/// Which lambda scales the jump contrast: the regime's (known) value or #D.
enum class LambdaMode { Known, Estimated };

inline std::string_view to_string(LambdaMode m) {
  return m == LambdaMode::Known ? "known" : "estimated";
}

inline LambdaMode parse_lambda_mode(std::string_view s) {
  if (s == "known") return LambdaMode::Known;
  if (s == "estimated") return LambdaMode::Estimated;
  fail(ErrorKind::Configuration, "unknown lambda mode '" + std::string(s) + "'");
}

struct EstimateOptions {
  NelderMeadOptions optimizer;
  bool joint = false;  // optimise all of theta at once instead of blockwise
  LambdaMode lambda_mode = LambdaMode::Known;
};

struct EstimationResult {
  model::ParameterPoint theta_hat;
  double contrast_value = 0.0;
  double lambda_hat = 0.0;
  double lambda_used = 0.0;  // scale applied to the jump contrast
  int iterations = 0;
  int restarts = 0;
  bool converged = false;
  bool continuous_converged = false;
  bool jump_converged = false;
  std::size_t n_c = 0;
  std::size_t n_d = 0;
};

/// lambda scaling the jump contrast; #D = 0 falls back to 1 since the
/// contrast is then identically zero.
inline double contrast_lambda(const model::RegimeConfig& regime, const FilterLabels& labels,
                              LambdaMode mode) {
  if (mode == LambdaMode::Known && regime.lambda > 0.0) return regime.lambda;
  const double d = estimate_intensity(labels);
  return d > 0.0 ? d : 1.0;
}

inline EstimationResult maximize_contrast(const simulate::ObservationRecord& obs,
                                          const FilterLabels& labels,
                                          const model::ModelSpec& model,
                                          const model::RegimeConfig& regime,
                                          const EstimateOptions& opts = {}) {
  if (obs.n < 2) fail(ErrorKind::Configuration, "estimation needs n >= 2 observations");
  model.validate();
  const std::size_t d1 = model.d1(), d2 = model.d2(), d3 = model.d3();
  EstimationResult out;
  out.lambda_hat = estimate_intensity(labels);
  out.lambda_used = contrast_lambda(regime, labels, opts.lambda_mode);
  out.n_d = labels.count_d();
  out.n_c = labels.count_c();
  const Contrast psi(obs, labels, model, out.lambda_used);

  if (opts.joint) {
    const auto split = [&](const Vector& v) { return model::ParameterPoint::split(v, d1, d2, d3); };
    const auto f = [&](const Vector& v) { return psi.full(split(v)); };
    const auto g = [&](const Vector& v) {
      const auto t = split(v);
      Vector out_g(v.size());
      out_g << psi.continuous_gradient(t.mu, t.sigma), psi.jump_gradient(t.alpha);
      return out_g;
    };
    const auto h = [&](const Vector& v) {
      const auto t = split(v);
      const auto k = static_cast<Eigen::Index>(d1 + d2);
      const auto j = static_cast<Eigen::Index>(d3);
      Matrix out_h = Matrix::Zero(v.size(), v.size());
      out_h.topLeftCorner(k, k) = psi.continuous_hessian(t.mu, t.sigma);
      out_h.bottomRightCorner(j, j) = psi.jump_hessian(t.alpha);
      return out_h;
    };
    const auto r = maximize_box(f, model.domain, opts.optimizer, g, h);
    out.theta_hat = split(r.argmax);
    out.contrast_value = r.value;
    out.iterations = r.iterations;
    out.restarts = r.restarts;
    out.continuous_converged = out.jump_converged = out.converged = r.converged;
    return out;
  }

  const auto box1 = model.domain.slice(0, d1 + d2);
  const auto box2 = model.domain.slice(d1 + d2, d3);
  const auto i1 = static_cast<Eigen::Index>(d1), i2 = static_cast<Eigen::Index>(d2);
  const auto r1 = maximize_box(
      [&](const Vector& v) { return psi.continuous(v.head(i1), v.tail(i2)); }, box1,
      opts.optimizer,
      [&](const Vector& v) { return psi.continuous_gradient(v.head(i1), v.tail(i2)); },
      [&](const Vector& v) { return psi.continuous_hessian(v.head(i1), v.tail(i2)); });
  const auto r2 = maximize_box([&](const Vector& a) { return psi.jump(a); }, box2,
                               opts.optimizer,
                               [&](const Vector& a) { return psi.jump_gradient(a); },
                               [&](const Vector& a) { return psi.jump_hessian(a); });
  out.theta_hat = {r1.argmax.head(i1), r1.argmax.tail(i2), r2.argmax};
  out.contrast_value = r1.value + r2.value;
  out.iterations = r1.iterations + r2.iterations;
  out.restarts = r1.restarts + r2.restarts;
  out.continuous_converged = r1.converged;
  out.jump_converged = r2.converged;
  out.converged = r1.converged && r2.converged;
  return out;
}

/// Classifies the increments with the regime's filter, then maximises.
inline EstimationResult maximize_contrast(const simulate::ObservationRecord& obs,
                                          const model::ModelSpec& model,
                                          const model::RegimeConfig& regime,
                                          const EstimateOptions& opts = {}) {
  if (obs.n < 2) fail(ErrorKind::Configuration, "estimation needs n >= 2 observations");
  return maximize_contrast(obs, classify_increments(obs, regime, model.density.support), model,
                           regime, opts);
}

}  // namespace jdsn::estimate
