#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "jdsn/error.hpp"
#include "jdsn/estimate/estimator.hpp"
#include "jdsn/fisher/information.hpp"
#include "jdsn/model/builtin.hpp"
#include "jdsn/model/parameters.hpp"
#include "jdsn/model/regime.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::cli {

using nlohmann::json;

inline constexpr const char* kVersion = "0.1.0";

/// Everything a batch run needs. Worker count is deliberately absent: it
/// never changes an output byte.
struct StudyConfig {
  std::string model_id = "ou-gamma";
  model::BuiltinOptions model_options;
  model::ParameterPoint theta0;
  model::RegimeConfig regime;
  std::vector<model::RegimeConfig> ladder;
  estimate::EstimateOptions estimate;
  simulate::SimulationOptions simulation;
  int fisher_time_steps = 101;
  fisher::QuadSpec quad;
  std::optional<std::size_t> reps;
  std::string output_dir = "out";
  std::uint64_t seed = 0;
  std::string observations;  // CSV of an observed path for `estimate`
  bool normality = true;
};

namespace detail {

inline std::vector<double> to_std(const Vector& v) { return {v.data(), v.data() + v.size()}; }

inline Vector to_vector(const json& j, const char* what) {
  if (!j.is_array()) fail(ErrorKind::Configuration, std::string(what) + " must be an array");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) fail(ErrorKind::Configuration, std::string(what) + " must hold numbers");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

inline std::string_view to_string(model::ThresholdUnits u) {
  return u == model::ThresholdUnits::NoiseScaled ? "noise_scaled" : "absolute";
}

inline model::ThresholdUnits parse_units(const std::string& s) {
  if (s == "noise_scaled") return model::ThresholdUnits::NoiseScaled;
  if (s == "absolute") return model::ThresholdUnits::Absolute;
  fail(ErrorKind::Configuration, "unknown threshold_units '" + s + "'");
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorKind::Configuration, std::string("field '") + key + "': " + e.what());
  }
}

inline void reject_unknown(const json& j, std::initializer_list<const char*> known,
                           const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : known) ok = ok || it.key() == k;
    if (!ok) fail(ErrorKind::Configuration, "unknown field '" + it.key() + "' in " + where);
  }
}

}  // namespace detail

inline json regime_to_json(const model::RegimeConfig& r) {
  return {{"n", r.n},
          {"epsilon", r.epsilon},
          {"lambda", r.lambda},
          {"rho", r.rho},
          {"v", r.v},
          {"threshold_units", std::string(detail::to_string(r.threshold_units))}};
}

inline model::RegimeConfig regime_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Configuration, "regime must be an object");
  detail::reject_unknown(j, {"n", "epsilon", "lambda", "rho", "v", "threshold_units"}, "regime");
  model::RegimeConfig r;
  r.n = detail::get_or(j, "n", r.n);
  r.epsilon = detail::get_or(j, "epsilon", r.epsilon);
  r.lambda = detail::get_or(j, "lambda", r.lambda);
  r.rho = detail::get_or(j, "rho", r.rho);
  r.v = detail::get_or(j, "v", r.v);
  r.threshold_units = detail::parse_units(
      detail::get_or<std::string>(j, "threshold_units", "noise_scaled"));
  r.validate();
  return r;
}

/// `include_output` is false for manifests, which must not depend on where
/// the files were written.
inline json to_json(const StudyConfig& c, bool include_output = true) {
  json j;
  j["model"] = c.model_id;
  j["model_options"] = {{"x0", c.model_options.x0},
                        {"c_const", c.model_options.c_const},
                        {"fixed_shape", c.model_options.fixed_shape}};
  j["theta0"] = {{"mu", detail::to_std(c.theta0.mu)},
                 {"sigma", detail::to_std(c.theta0.sigma)},
                 {"alpha", detail::to_std(c.theta0.alpha)}};
  j["regime"] = regime_to_json(c.regime);
  if (!c.ladder.empty()) {
    j["ladder"] = json::array();
    for (const auto& r : c.ladder) j["ladder"].push_back(regime_to_json(r));
  }
  const auto& o = c.estimate.optimizer;
  j["optimizer"] = {{"starts", o.starts},
                    {"max_iterations", o.max_iterations},
                    {"diameter_tol", o.diameter_tol},
                    {"initial_step", o.initial_step},
                    {"polish", o.polish},
                    {"joint", c.estimate.joint},
                    {"lambda_mode", std::string(estimate::to_string(c.estimate.lambda_mode))}};
  j["simulation"] = {{"substeps", c.simulation.substeps},
                     {"divergence_bound", c.simulation.divergence_bound}};
  j["fisher"] = {{"time_steps", c.fisher_time_steps},
                 {"tail_mass", c.quad.tail_mass},
                 {"tol", c.quad.tol},
                 {"max_depth", c.quad.max_depth},
                 {"panels", c.quad.panels}};
  if (c.reps) j["reps"] = *c.reps;
  if (include_output) j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  if (!c.observations.empty()) j["observations"] = c.observations;
  j["normality"] = c.normality;
  return j;
}

/// Parses and validates; all failures are configuration errors.
inline StudyConfig config_from_json(const json& j) {
  if (!j.is_object()) fail(ErrorKind::Configuration, "config must be a JSON object");
  detail::reject_unknown(j,
                         {"model", "model_options", "theta0", "regime", "ladder", "optimizer",
                          "simulation", "fisher", "reps", "output_dir", "seed", "observations",
                          "normality"},
                         "config");
  StudyConfig c;
  c.model_id = detail::get_or<std::string>(j, "model", c.model_id);
  if (j.contains("model_options")) {
    const auto& mo = j.at("model_options");
    detail::reject_unknown(mo, {"x0", "c_const", "fixed_shape"}, "model_options");
    c.model_options.x0 = detail::get_or(mo, "x0", c.model_options.x0);
    c.model_options.c_const = detail::get_or(mo, "c_const", c.model_options.c_const);
    c.model_options.fixed_shape = detail::get_or(mo, "fixed_shape", c.model_options.fixed_shape);
  }
  if (!j.contains("theta0")) fail(ErrorKind::Configuration, "config needs theta0");
  const auto& t = j.at("theta0");
  if (!t.is_object()) fail(ErrorKind::Configuration, "theta0 must be an object");
  detail::reject_unknown(t, {"mu", "sigma", "alpha"}, "theta0");
  if (!t.contains("mu") || !t.contains("sigma") || !t.contains("alpha")) {
    fail(ErrorKind::Configuration, "theta0 needs mu, sigma and alpha");
  }
  c.theta0 = {detail::to_vector(t.at("mu"), "theta0.mu"),
              detail::to_vector(t.at("sigma"), "theta0.sigma"),
              detail::to_vector(t.at("alpha"), "theta0.alpha")};
  if (!j.contains("regime")) fail(ErrorKind::Configuration, "config needs a regime");
  c.regime = regime_from_json(j.at("regime"));
  if (j.contains("ladder")) {
    if (!j.at("ladder").is_array()) fail(ErrorKind::Configuration, "ladder must be an array");
    for (const auto& r : j.at("ladder")) c.ladder.push_back(regime_from_json(r));
  }
  if (j.contains("optimizer")) {
    const auto& o = j.at("optimizer");
    detail::reject_unknown(o,
                           {"starts", "max_iterations", "diameter_tol", "initial_step", "polish",
                            "joint", "lambda_mode"},
                           "optimizer");
    auto& nm = c.estimate.optimizer;
    nm.starts = detail::get_or(o, "starts", nm.starts);
    nm.max_iterations = detail::get_or(o, "max_iterations", nm.max_iterations);
    nm.diameter_tol = detail::get_or(o, "diameter_tol", nm.diameter_tol);
    nm.initial_step = detail::get_or(o, "initial_step", nm.initial_step);
    nm.polish = detail::get_or(o, "polish", nm.polish);
    c.estimate.joint = detail::get_or(o, "joint", c.estimate.joint);
    c.estimate.lambda_mode =
        estimate::parse_lambda_mode(detail::get_or<std::string>(o, "lambda_mode", "known"));
    if (nm.starts < 1 || nm.max_iterations < 1 || !(nm.diameter_tol > 0.0)) {
      fail(ErrorKind::Configuration, "optimizer settings must be positive");
    }
  }
  if (j.contains("simulation")) {
    const auto& s = j.at("simulation");
    detail::reject_unknown(s, {"substeps", "divergence_bound"}, "simulation");
    c.simulation.substeps = detail::get_or(s, "substeps", c.simulation.substeps);
    c.simulation.divergence_bound =
        detail::get_or(s, "divergence_bound", c.simulation.divergence_bound);
  }
  if (j.contains("fisher")) {
    const auto& f = j.at("fisher");
    detail::reject_unknown(f, {"time_steps", "tail_mass", "tol", "max_depth", "panels"}, "fisher");
    c.fisher_time_steps = detail::get_or(f, "time_steps", c.fisher_time_steps);
    c.quad.tail_mass = detail::get_or(f, "tail_mass", c.quad.tail_mass);
    c.quad.tol = detail::get_or(f, "tol", c.quad.tol);
    c.quad.max_depth = detail::get_or(f, "max_depth", c.quad.max_depth);
    c.quad.panels = detail::get_or(f, "panels", c.quad.panels);
  }
  if (j.contains("reps")) {
    const auto r = detail::get_or<long long>(j, "reps", 1);
    if (r < 1) fail(ErrorKind::Configuration, "reps must be >= 1");
    c.reps = static_cast<std::size_t>(r);
  }
  c.output_dir = detail::get_or<std::string>(j, "output_dir", c.output_dir);
  c.seed = detail::get_or<std::uint64_t>(j, "seed", c.seed);
  c.observations = detail::get_or<std::string>(j, "observations", "");
  c.normality = detail::get_or(j, "normality", c.normality);

  // Everything referenced must resolve.
  const auto m = model::make_builtin_model(c.model_id, c.model_options);
  if (c.theta0.d1() != m.d1() || c.theta0.d2() != m.d2() || c.theta0.d3() != m.d3()) {
    fail(ErrorKind::Configuration,
         "theta0 dimensions do not match model '" + c.model_id + "' (mu " +
             std::to_string(m.d1()) + ", sigma " + std::to_string(m.d2()) + ", alpha " +
             std::to_string(m.d3()) + ")");
  }
  try {
    m.require_point(c.theta0);
    model::require_admissible(m.density.kind, m.density.native(c.theta0.alpha));
    if (!m.domain.contains(c.theta0.concat())) {
      fail(ErrorKind::ParameterDomain, "theta0 lies outside the parameter box of '" + c.model_id + "'");
    }
  } catch (const Error& e) {
    fail(ErrorKind::Configuration, std::string("theta0: ") + e.what());
  }
  return c;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Configuration, "cannot open config file '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Configuration, "config '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Accepts a plain config or a manifest written by a previous run.
inline StudyConfig load_config(const std::string& path) {
  json j = read_json_file(path);
  if (j.is_object() && j.contains("manifest_version") && j.contains("config")) {
    StudyConfig c = config_from_json(j.at("config"));
    return c;
  }
  return config_from_json(j);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001B3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = kDigits[v & 0xF];
  return out;
}

inline json make_manifest(const StudyConfig& c, const std::string& command) {
  const json embedded = to_json(c, false);
  return {{"manifest_version", 1},
          {"tool", "jdsn"},
          {"version", kVersion},
          {"command", command},
          {"seed", c.seed},
          {"config_hash", hex64(fnv1a64(embedded.dump()))},
          {"config", embedded}};
}

}  // namespace jdsn::cli
