#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "jdsn/error.hpp"
#include "jdsn/types.hpp"

namespace jdsn::model {

enum class DensityKind { Normal, Gamma, InverseGaussian, Weibull, LogNormal };

enum class SupportKind { WholeLine, PositiveHalfLine };

/// Native parameterisations (first, second):
///   Normal           (mean, standard deviation)
///   Gamma            (scale, shape), shape > 1
///   InverseGaussian  (mean, shape)
///   Weibull          (scale, shape), shape > 1
///   LogNormal        (meanlog, sdlog)
using NativeParams = std::array<double, 2>;

/// log f and its partial derivatives in z and in the two native parameters.
struct LogDensityDerivatives {
  double value = 0.0;
  double dz = 0.0;
  double dzz = 0.0;
  std::array<double, 2> dp{};
  std::array<double, 2> dzp{};
  std::array<std::array<double, 2>, 2> dpp{};
};

struct JumpDensityFamily {
  DensityKind kind = DensityKind::Normal;
  SupportKind support = SupportKind::WholeLine;
  /// Blow-up order of d(psi)/dy at the origin; empty for whole-line families.
  std::optional<double> q_exponent;
  /// Native parameters pinned to a value; the rest are free alpha entries.
  std::array<std::optional<double>, 2> fixed{};

  static JumpDensityFamily make(DensityKind kind) {
    JumpDensityFamily fam;
    fam.kind = kind;
    switch (kind) {
      case DensityKind::Normal:
        fam.support = SupportKind::WholeLine;
        break;
      case DensityKind::Gamma:
      case DensityKind::Weibull:
      case DensityKind::LogNormal:
        // LogNormal's bound carries an extra log factor; q = 1 is kept.
        fam.support = SupportKind::PositiveHalfLine;
        fam.q_exponent = 1.0;
        break;
      case DensityKind::InverseGaussian:
        fam.support = SupportKind::PositiveHalfLine;
        fam.q_exponent = 2.0;
        break;
    }
    return fam;
  }

  JumpDensityFamily with_fixed(std::size_t native_index, double value) const {
    JumpDensityFamily out = *this;
    out.fixed.at(native_index) = value;
    return out;
  }

  /// Number of alpha entries consumed by the density itself.
  std::size_t alpha_dim() const {
    return static_cast<std::size_t>(!fixed[0]) +
           static_cast<std::size_t>(!fixed[1]);
  }

  /// Native parameter index for each free alpha slot.
  std::array<std::size_t, 2> free_slots() const {
    std::array<std::size_t, 2> slots{0, 1};
    std::size_t k = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      if (!fixed[i]) slots[k++] = i;
    }
    return slots;
  }

  NativeParams native(const Vector& alpha) const {
    if (static_cast<std::size_t>(alpha.size()) < alpha_dim()) {
      fail(ErrorKind::ParameterDomain,
           "alpha has " + std::to_string(alpha.size()) +
               " entries, density needs " + std::to_string(alpha_dim()));
    }
    NativeParams p{};
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < 2; ++i) {
      p[i] = fixed[i] ? *fixed[i] : alpha[k++];
    }
    return p;
  }
};

inline std::string_view family_id(DensityKind kind) {
  switch (kind) {
    case DensityKind::Normal: return "normal";
    case DensityKind::Gamma: return "gamma";
    case DensityKind::InverseGaussian: return "ig";
    case DensityKind::Weibull: return "weibull";
    case DensityKind::LogNormal: return "lognormal";
  }
  return "unknown";
}

inline DensityKind parse_family(std::string_view id) {
  if (id == "normal") return DensityKind::Normal;
  if (id == "gamma") return DensityKind::Gamma;
  if (id == "ig" || id == "inverse-gaussian") return DensityKind::InverseGaussian;
  if (id == "weibull") return DensityKind::Weibull;
  if (id == "lognormal") return DensityKind::LogNormal;
  fail(ErrorKind::Configuration, "unknown density family '" + std::string(id) + "'");
}

inline bool admissible(DensityKind kind, const NativeParams& p) {
  if (!std::isfinite(p[0]) || !std::isfinite(p[1])) return false;
  switch (kind) {
    case DensityKind::Normal: return p[1] > 0.0;
    case DensityKind::Gamma: return p[0] > 0.0 && p[1] > 1.0;
    case DensityKind::InverseGaussian: return p[0] > 0.0 && p[1] > 0.0;
    case DensityKind::Weibull: return p[0] > 0.0 && p[1] > 1.0;
    case DensityKind::LogNormal: return p[1] > 0.0;
  }
  return false;
}

inline void require_admissible(DensityKind kind, const NativeParams& p) {
  if (!admissible(kind, p)) {
    fail(ErrorKind::ParameterDomain,
         std::string(family_id(kind)) + " parameters (" + std::to_string(p[0]) +
             ", " + std::to_string(p[1]) + ") are outside the admissible set");
  }
}

inline bool in_support_interior(SupportKind support, double z) {
  return support == SupportKind::WholeLine ? std::isfinite(z)
                                           : (z > 0.0 && std::isfinite(z));
}

namespace detail {

inline constexpr double kHalfLog2Pi = 0.91893853320467274178;  // log(2 pi) / 2

// Caller guarantees admissible params and z in the support interior.
inline LogDensityDerivatives log_density(DensityKind kind, const NativeParams& p,
                                         double z) {
  LogDensityDerivatives d;
  switch (kind) {
    case DensityKind::Normal: {
      const double m = p[0], s = p[1];
      const double r = z - m, s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
      d.value = -kHalfLog2Pi - std::log(s) - r * r / (2.0 * s2);
      d.dz = -r / s2;
      d.dzz = -1.0 / s2;
      d.dp = {r / s2, -1.0 / s + r * r / s3};
      d.dzp = {1.0 / s2, 2.0 * r / s3};
      d.dpp = {{{-1.0 / s2, -2.0 * r / s3}, {-2.0 * r / s3, 1.0 / s2 - 3.0 * r * r / s4}}};
      break;
    }
    case DensityKind::Gamma: {
      const double th = p[0], k = p[1];
      const double lz = std::log(z), lth = std::log(th);
      d.value = -std::lgamma(k) - k * lth + (k - 1.0) * lz - z / th;
      d.dz = (k - 1.0) / z - 1.0 / th;
      d.dzz = -(k - 1.0) / (z * z);
      d.dp = {-k / th + z / (th * th), -boost::math::digamma(k) - lth + lz};
      d.dzp = {1.0 / (th * th), 1.0 / z};
      const double t2 = th * th, t3 = t2 * th;
      d.dpp = {{{k / t2 - 2.0 * z / t3, -1.0 / th},
                {-1.0 / th, -boost::math::trigamma(k)}}};
      break;
    }
    case DensityKind::InverseGaussian: {
      const double m = p[0], l = p[1];
      const double m2 = m * m, m3 = m2 * m, m4 = m2 * m2;
      // h = (z - m)^2 / (m^2 z)
      const double h = z / m2 - 2.0 / m + 1.0 / z;
      const double hz = 1.0 / m2 - 1.0 / (z * z);
      const double hzz = 2.0 / (z * z * z);
      const double hm = -2.0 * z / m3 + 2.0 / m2;
      const double hmm = 6.0 * z / m4 - 4.0 / m3;
      const double hzm = -2.0 / m3;
      d.value = 0.5 * std::log(l) - kHalfLog2Pi - 1.5 * std::log(z) - 0.5 * l * h;
      d.dz = -1.5 / z - 0.5 * l * hz;
      d.dzz = 1.5 / (z * z) - 0.5 * l * hzz;
      d.dp = {-0.5 * l * hm, 0.5 / l - 0.5 * h};
      d.dzp = {-0.5 * l * hzm, -0.5 * hz};
      d.dpp = {{{-0.5 * l * hmm, -0.5 * hm}, {-0.5 * hm, -0.5 / (l * l)}}};
      break;
    }
    case DensityKind::Weibull: {
      const double s = p[0], k = p[1];
      const double u = std::log(z / s);
      const double w = std::exp(k * u);  // (z / s)^k
      d.value = std::log(k) - std::log(s) + (k - 1.0) * u - w;
      d.dz = ((k - 1.0) - k * w) / z;
      d.dzz = (-(k - 1.0) - k * (k - 1.0) * w) / (z * z);
      d.dp = {k * (w - 1.0) / s, 1.0 / k + u - u * w};
      d.dzp = {k * k * w / (z * s), (1.0 - w * (1.0 + k * u)) / z};
      d.dpp = {{{(-k * (w - 1.0) - k * k * w) / (s * s), ((w - 1.0) + k * u * w) / s},
                {((w - 1.0) + k * u * w) / s, -1.0 / (k * k) - u * u * w}}};
      break;
    }
    case DensityKind::LogNormal: {
      const double m = p[0], s = p[1];
      const double u = std::log(z), r = u - m;
      const double s2 = s * s, s3 = s2 * s, s4 = s2 * s2;
      d.value = -kHalfLog2Pi - std::log(s) - u - r * r / (2.0 * s2);
      d.dz = (-1.0 - r / s2) / z;
      d.dzz = (1.0 - 1.0 / s2 + r / s2) / (z * z);
      d.dp = {r / s2, -1.0 / s + r * r / s3};
      d.dzp = {1.0 / (s2 * z), 2.0 * r / (s3 * z)};
      d.dpp = {{{-1.0 / s2, -2.0 * r / s3}, {-2.0 * r / s3, 1.0 / s2 - 3.0 * r * r / s4}}};
      break;
    }
  }
  return d;
}

}  // namespace detail

/// Density f_alpha(z); exactly zero off the support.
inline double density_pdf(const JumpDensityFamily& family, const Vector& alpha,
                          double z) {
  const NativeParams p = family.native(alpha);
  require_admissible(family.kind, p);
  if (!in_support_interior(family.support, z)) return 0.0;
  return std::exp(detail::log_density(family.kind, p, z).value);
}

/// Log-density derivatives for a family whose parameters are already known to
/// be admissible; z must lie in the support interior.
inline LogDensityDerivatives log_density_derivatives(const JumpDensityFamily& family,
                                                     const NativeParams& p,
                                                     double z) {
  if (!in_support_interior(family.support, z)) {
    fail(ErrorKind::BoundaryEvaluation,
         "log-density derivative requested at z=" + std::to_string(z) +
             " outside the support interior");
  }
  return detail::log_density(family.kind, p, z);
}

inline double family_mean(DensityKind kind, const NativeParams& p) {
  switch (kind) {
    case DensityKind::Normal: return p[0];
    case DensityKind::Gamma: return p[0] * p[1];
    case DensityKind::InverseGaussian: return p[0];
    case DensityKind::Weibull: return p[0] * std::tgamma(1.0 + 1.0 / p[1]);
    case DensityKind::LogNormal: return std::exp(p[0] + 0.5 * p[1] * p[1]);
  }
  return 0.0;
}

inline double family_sd(DensityKind kind, const NativeParams& p) {
  switch (kind) {
    case DensityKind::Normal: return p[1];
    case DensityKind::Gamma: return p[0] * std::sqrt(p[1]);
    case DensityKind::InverseGaussian: return std::sqrt(p[0] * p[0] * p[0] / p[1]);
    case DensityKind::Weibull: {
      const double g1 = std::tgamma(1.0 + 1.0 / p[1]);
      const double g2 = std::tgamma(1.0 + 2.0 / p[1]);
      return p[0] * std::sqrt(std::max(g2 - g1 * g1, 0.0));
    }
    case DensityKind::LogNormal: {
      const double s2 = p[1] * p[1];
      return std::sqrt(std::expm1(s2)) * std::exp(p[0] + 0.5 * s2);
    }
  }
  return 0.0;
}

/// Draws one jump mark from f_alpha.
template <class Engine>
double sample_mark(DensityKind kind, const NativeParams& p, Engine& engine) {
  switch (kind) {
    case DensityKind::Normal:
      return std::normal_distribution<double>(p[0], p[1])(engine);
    case DensityKind::Gamma:
      return std::gamma_distribution<double>(p[1], p[0])(engine);
    case DensityKind::InverseGaussian: {
      // Michael, Schucany and Haas transformation.
      const double m = p[0], l = p[1];
      const double nu = std::normal_distribution<double>(0.0, 1.0)(engine);
      const double y = nu * nu;
      const double x = m + m * m * y / (2.0 * l) -
                       m / (2.0 * l) * std::sqrt(4.0 * m * l * y + m * m * y * y);
      const double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
      return u <= m / (m + x) ? x : m * m / x;
    }
    case DensityKind::Weibull:
      return std::weibull_distribution<double>(p[1], p[0])(engine);
    case DensityKind::LogNormal:
      return std::lognormal_distribution<double>(p[0], p[1])(engine);
  }
  return 0.0;
}

}  // namespace jdsn::model
