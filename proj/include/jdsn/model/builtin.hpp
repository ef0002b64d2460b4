#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/density.hpp"
#include "jdsn/model/model_spec.hpp"

namespace jdsn::model {

/// Knobs for built-in models that are not estimated parameters.
struct BuiltinOptions {
  double x0 = 1.0;
  double c_const = 1.0;     // value of the constant jump scale
  double fixed_shape = 2.0; // pinned Gamma shape for "ou-gamma-scale"
};

namespace detail {

inline std::pair<Vector, Vector> default_alpha_box(DensityKind kind) {
  switch (kind) {
    case DensityKind::Normal: return {Vector{{-10.0, 0.05}}, Vector{{10.0, 10.0}}};
    case DensityKind::Gamma: return {Vector{{0.05, 1.01}}, Vector{{10.0, 20.0}}};
    case DensityKind::InverseGaussian: return {Vector{{0.05, 0.05}}, Vector{{10.0, 50.0}}};
    case DensityKind::Weibull: return {Vector{{0.05, 1.01}}, Vector{{10.0, 20.0}}};
    case DensityKind::LogNormal: return {Vector{{-5.0, 0.05}}, Vector{{5.0, 5.0}}};
  }
  return {};
}

}  // namespace detail

/// Ornstein-Uhlenbeck drift a = -mu x, diffusion b = sigma, constant jump
/// scale, jumps from `family`.
inline ModelSpec make_ou_model(const JumpDensityFamily& family,
                               const BuiltinOptions& opts = {}) {
  ModelSpec m;
  m.id = "ou-" + std::string(family_id(family.kind));
  m.drift = ou_drift();
  m.diffusion = constant_diffusion();
  m.density = family;
  m.jump_scale = constant_coefficient(family.alpha_dim(), opts.c_const);
  m.x0 = opts.x0;

  auto [alo, ahi] = detail::default_alpha_box(family.kind);
  const auto slots = family.free_slots();
  const auto na = static_cast<Eigen::Index>(family.alpha_dim());
  m.domain.lower.resize(2 + na);
  m.domain.upper.resize(2 + na);
  m.domain.lower.head(2) << 0.01, 0.05;
  m.domain.upper.head(2) << 5.0, 5.0;
  for (Eigen::Index i = 0; i < na; ++i) {
    const auto s = static_cast<Eigen::Index>(slots[static_cast<std::size_t>(i)]);
    m.domain.lower[2 + i] = alo[s];
    m.domain.upper[2 + i] = ahi[s];
  }
  return m;
}

/// Same as make_ou_model but with c(x, alpha) = exp(alpha_last * tanh x), so
/// the jump scale carries its own parameter.
inline ModelSpec make_ou_tanh_model(const JumpDensityFamily& family,
                                    const BuiltinOptions& opts = {}) {
  ModelSpec m = make_ou_model(family, opts);
  m.id += "-tanhc";
  const std::size_t d3 = family.alpha_dim() + 1;
  m.jump_scale = tanh_jump_scale(d3, d3 - 1);
  const auto d = m.domain.lower.size();
  m.domain.lower.conservativeResize(d + 1);
  m.domain.upper.conservativeResize(d + 1);
  m.domain.lower[d] = -1.0;
  m.domain.upper[d] = 1.0;
  return m;
}

inline std::vector<std::string> builtin_model_ids() {
  std::vector<std::string> ids;
  for (auto k : {DensityKind::Normal, DensityKind::Gamma, DensityKind::InverseGaussian,
                 DensityKind::Weibull, DensityKind::LogNormal}) {
    ids.push_back("ou-" + std::string(family_id(k)));
    ids.push_back("ou-" + std::string(family_id(k)) + "-tanhc");
  }
  ids.emplace_back("ou-gamma-scale");
  return ids;
}

/// Resolves "ou-<family>", "ou-<family>-tanhc" and "ou-gamma-scale".
inline ModelSpec make_builtin_model(std::string_view id, const BuiltinOptions& opts = {}) {
  if (id == "ou-gamma-scale") {
    auto fam = JumpDensityFamily::make(DensityKind::Gamma).with_fixed(1, opts.fixed_shape);
    ModelSpec m = make_ou_model(fam, opts);
    m.id = "ou-gamma-scale";
    return m;
  }
  if (id.substr(0, 3) != "ou-") {
    fail(ErrorKind::Configuration, "unknown model id '" + std::string(id) + "'");
  }
  std::string_view rest = id.substr(3);
  bool tanh_c = false;
  constexpr std::string_view suffix = "-tanhc";
  if (rest.size() > suffix.size() && rest.substr(rest.size() - suffix.size()) == suffix) {
    tanh_c = true;
    rest = rest.substr(0, rest.size() - suffix.size());
  }
  const auto fam = JumpDensityFamily::make(parse_family(rest));
  return tanh_c ? make_ou_tanh_model(fam, opts) : make_ou_model(fam, opts);
}

}  // namespace jdsn::model
