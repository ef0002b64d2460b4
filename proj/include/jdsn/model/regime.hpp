#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/density.hpp"
#include "jdsn/numerics/quadrature.hpp"

namespace jdsn::model {

/// Units in which the filter threshold v / n^rho is expressed.
///  - NoiseScaled: compared against the increment divided by epsilon, i.e. the
///    threshold on the raw increment is eps * v / n^rho.
///  - Absolute: compared against the raw increment.
enum class ThresholdUnits { NoiseScaled, Absolute };

struct RegimeConfig {
  int n = 1000;
  double epsilon = 0.01;
  double lambda = 10.0;
  double rho = 0.2;
  double v = 1.0;
  std::uint64_t seed = 0;
  ThresholdUnits threshold_units = ThresholdUnits::NoiseScaled;

  /// Threshold applied to the raw increments Delta_k X.
  double increment_threshold() const {
    const double base = v / std::pow(static_cast<double>(n), rho);
    return threshold_units == ThresholdUnits::NoiseScaled ? epsilon * base : base;
  }

  void validate() const {
    if (n < 2) fail(ErrorKind::Configuration, "regime needs n >= 2 observations");
    if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
      fail(ErrorKind::Configuration, "regime epsilon must be positive");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
      fail(ErrorKind::Configuration, "regime lambda must be non-negative");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorKind::Configuration, "threshold level v must be positive");
    }
    if (!(rho > 0.0 && rho < 0.5)) {
      fail(ErrorKind::Configuration, "rho must lie in (0, 1/2)");
    }
  }
};

/// kappa = 4 v / c1
inline double filter_kappa(double v, double c1) { return 4.0 * v / c1; }

struct RhoVerdict {
  bool admissible = false;
  double lower = 0.0;  // open interval (lower, upper)
  double upper = 0.5;
  std::string reason;
};

inline RhoVerdict validate_rho(const JumpDensityFamily& family, double rho) {
  RhoVerdict out;
  if (family.support == SupportKind::WholeLine) {
    out.upper = 0.5;
  } else {
    const double q = family.q_exponent.value_or(0.0);
    out.upper = q > 0.0 ? std::min(0.5, 1.0 / (4.0 * q)) : 0.5;
  }
  std::ostringstream msg;
  msg.precision(6);
  if (!std::isfinite(rho)) {
    msg << "rho is not finite";
  } else if (rho > out.lower && rho < out.upper) {
    out.admissible = true;
    msg << "rho=" << rho << " lies in (" << out.lower << ", " << out.upper << ")";
  } else {
    msg << "rho=" << rho << " is outside the open interval (" << out.lower << ", "
        << out.upper << ") for the " << family_id(family.kind) << " family";
  }
  out.reason = msg.str();
  return out;
}

// ---------------------------------------------------------------------------
// Regime ladder diagnostics.

enum class Trend { Ok, Stalled, Violated, NoTrend };

inline std::string_view to_string(Trend t) {
  switch (t) {
    case Trend::Ok: return "ok";
    case Trend::Stalled: return "stalled";
    case Trend::Violated: return "violated";
    case Trend::NoTrend: return "no-trend";
  }
  return "unknown";
}

struct ConditionTrend {
  std::string name;
  std::string wanted;  // "increasing", "decreasing", "bounded"
  std::vector<double> values;
  Trend trend = Trend::NoTrend;
  /// Rate conditions block a study; the filter-mass condition only warns.
  bool blocking = true;
};

struct LadderDiagnostics {
  std::vector<ConditionTrend> conditions;
  std::vector<std::string> notes;

  bool refused() const {
    return std::any_of(conditions.begin(), conditions.end(), [](const auto& c) {
      return c.blocking && c.trend == Trend::Violated;
    });
  }

  const ConditionTrend& condition(std::string_view name) const {
    for (const auto& c : conditions) {
      if (c.name == name) return c;
    }
    fail(ErrorKind::Configuration, "no ladder condition named " + std::string(name));
  }
};

/// What the filter-mass condition needs to know about the jump law.
struct LadderContext {
  JumpDensityFamily family;
  Vector alpha0;
  double c1 = 1.0;
};

/// Mass of f_alpha on {|z| <= t}.
inline double small_jump_mass(const JumpDensityFamily& family, const Vector& alpha,
                              double t) {
  const NativeParams p = family.native(alpha);
  require_admissible(family.kind, p);
  numerics::AdaptiveSimpson quad(1e-13);
  const auto f = [&](double z) {
    return in_support_interior(family.support, z)
               ? std::exp(detail::log_density(family.kind, p, z).value)
               : 0.0;
  };
  const double lo = family.support == SupportKind::WholeLine ? -t : 0.0;
  return quad.integrate_scalar(f, lo, t);
}

namespace detail {

inline Trend classify_trend(const std::vector<double>& v, bool want_increase) {
  if (v.size() < 2) return Trend::NoTrend;
  const double scale = std::max(1.0, std::abs(v.front()));
  const double tie = 1e-12 * scale;
  bool stalled = false;
  for (std::size_t i = 1; i < v.size(); ++i) {
    const double step = want_increase ? v[i] - v[i - 1] : v[i - 1] - v[i];
    if (step < -tie) return Trend::Violated;
    if (std::abs(step) <= tie) stalled = true;
  }
  return stalled ? Trend::Stalled : Trend::Ok;
}

}  // namespace detail

inline LadderDiagnostics validate_regime_ladder(const std::vector<RegimeConfig>& ladder,
                                                const LadderContext& ctx) {
  if (ladder.empty()) fail(ErrorKind::Configuration, "regime ladder is empty");
  LadderDiagnostics out;
  ConditionTrend lam{"lambda", "increasing", {}, Trend::NoTrend, true};
  ConditionTrend eps_lam{"eps_lambda", "decreasing", {}, Trend::NoTrend, true};
  ConditionTrend lam2n{"lambda_sq_over_n", "decreasing", {}, Trend::NoTrend, true};
  ConditionTrend inv_e2n{"inv_eps_sq_n", "bounded", {}, Trend::NoTrend, true};
  ConditionTrend mass{"filter_mass", "decreasing", {}, Trend::NoTrend, false};
  for (const auto& r : ladder) {
    r.validate();
    const double n = static_cast<double>(r.n);
    lam.values.push_back(r.lambda);
    eps_lam.values.push_back(r.epsilon * r.lambda);
    lam2n.values.push_back(r.lambda * r.lambda / n);
    inv_e2n.values.push_back(1.0 / (r.epsilon * r.epsilon * n));
    const double t = filter_kappa(r.v, ctx.c1) / std::pow(n, r.rho);
    mass.values.push_back(r.lambda * small_jump_mass(ctx.family, ctx.alpha0, t));
  }
  lam.trend = detail::classify_trend(lam.values, true);
  eps_lam.trend = detail::classify_trend(eps_lam.values, false);
  lam2n.trend = detail::classify_trend(lam2n.values, false);
  // Bounded: flat is fine, growth is not.
  inv_e2n.trend = detail::classify_trend(inv_e2n.values, false);
  if (inv_e2n.trend == Trend::Stalled) inv_e2n.trend = Trend::Ok;
  mass.trend = detail::classify_trend(mass.values, false);
  out.conditions = {lam, eps_lam, lam2n, inv_e2n, mass};

  if (ladder.size() == 1) {
    out.notes.push_back("single-rung ladder: no trend to check");
  }
  for (const auto& c : out.conditions) {
    if (c.trend == Trend::Violated) {
      out.notes.push_back(c.name + " moves the wrong way (wanted " + c.wanted + ")" +
                          (c.blocking ? "" : "; warning only"));
    } else if (c.trend == Trend::Stalled) {
      out.notes.push_back(c.name + " is flat on part of the ladder (wanted " +
                          c.wanted + ")");
    }
  }
  return out;
}

}  // namespace jdsn::model
