#pragma once

#include <cmath>
#include <cstddef>
#include <string>

#include "jdsn/error.hpp"
#include "jdsn/types.hpp"

namespace jdsn::model {

/// theta = (mu, sigma, alpha): drift, diffusion and jump parameters.
struct ParameterPoint {
  Vector mu;
  Vector sigma;
  Vector alpha;

  std::size_t d1() const { return static_cast<std::size_t>(mu.size()); }
  std::size_t d2() const { return static_cast<std::size_t>(sigma.size()); }
  std::size_t d3() const { return static_cast<std::size_t>(alpha.size()); }
  std::size_t dim() const { return d1() + d2() + d3(); }

  Vector concat() const {
    Vector out(static_cast<Eigen::Index>(dim()));
    out << mu, sigma, alpha;
    return out;
  }

  static ParameterPoint split(const Vector& theta, std::size_t d1,
                              std::size_t d2, std::size_t d3) {
    if (static_cast<std::size_t>(theta.size()) != d1 + d2 + d3) {
      fail(ErrorKind::ParameterDomain, "parameter vector has length " +
                                           std::to_string(theta.size()) +
                                           ", expected " +
                                           std::to_string(d1 + d2 + d3));
    }
    const auto i1 = static_cast<Eigen::Index>(d1);
    const auto i2 = static_cast<Eigen::Index>(d2);
    const auto i3 = static_cast<Eigen::Index>(d3);
    return {theta.segment(0, i1), theta.segment(i1, i2),
            theta.segment(i1 + i2, i3)};
  }

  bool finite() const { return concat().allFinite(); }
};

/// Open box lower < theta < upper standing in for the parameter set.
struct ParameterDomain {
  Vector lower;
  Vector upper;

  std::size_t dim() const { return static_cast<std::size_t>(lower.size()); }

  void validate() const {
    if (lower.size() != upper.size()) {
      fail(ErrorKind::ParameterDomain, "domain bounds differ in length");
    }
    for (Eigen::Index i = 0; i < lower.size(); ++i) {
      if (!(std::isfinite(lower[i]) && std::isfinite(upper[i]) &&
            lower[i] < upper[i])) {
        fail(ErrorKind::ParameterDomain,
             "domain coordinate " + std::to_string(i) +
                 " must satisfy lower < upper");
      }
    }
  }

  bool contains(const Vector& theta) const {
    if (theta.size() != lower.size()) return false;
    return ((theta.array() > lower.array()) && (theta.array() < upper.array()))
        .all();
  }

  Vector center() const { return 0.5 * (lower + upper); }

  /// Projects into the box, keeping a relative margin from each face.
  Vector clamp_inside(const Vector& theta, double rel_margin = 1e-9) const {
    Vector out = theta;
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      const double m = rel_margin * (upper[i] - lower[i]);
      if (!(out[i] >= lower[i] + m)) out[i] = lower[i] + m;
      if (out[i] > upper[i] - m) out[i] = upper[i] - m;
    }
    return out;
  }

  ParameterDomain slice(std::size_t offset, std::size_t count) const {
    const auto o = static_cast<Eigen::Index>(offset);
    const auto c = static_cast<Eigen::Index>(count);
    return {lower.segment(o, c), upper.segment(o, c)};
  }
};

}  // namespace jdsn::model
