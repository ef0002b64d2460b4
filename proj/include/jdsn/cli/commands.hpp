#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "jdsn/cli/config.hpp"
#include "jdsn/error.hpp"
#include "jdsn/estimate/estimator.hpp"
#include "jdsn/fisher/information.hpp"
#include "jdsn/mcstudy/ladder.hpp"
#include "jdsn/mcstudy/normality.hpp"
#include "jdsn/mcstudy/study.hpp"
#include "jdsn/model/builtin.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

struct RunOptions {
  std::string out_dir;  // empty: use the config's output_dir
  int workers = 1;
  bool verbose = false;
  std::ostream* log = &std::cerr;
  std::ostream* report = &std::cout;
};

inline int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Configuration:
    case ErrorKind::ParameterDomain:
      return kExitConfig;
    default:
      return kExitNumerical;
  }
}

inline json error_json(std::string_view kind, const std::string& message, int code) {
  return {{"error", {{"kind", kind}, {"message", message}, {"exit_code", code}}}};
}

namespace detail {

inline std::filesystem::path prepare_out(const StudyConfig& c, const RunOptions& o) {
  std::filesystem::path dir = o.out_dir.empty() ? c.output_dir : o.out_dir;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) fail(ErrorKind::Configuration, "cannot create output directory '" + dir.string() + "'");
  return dir;
}

inline std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream os(p, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorKind::Configuration, "cannot write '" + p.string() + "'");
  return os;
}

inline void write_json(const std::filesystem::path& p, const json& j) {
  auto os = open_out(p);
  os << j.dump(2) << '\n';
}

inline void write_manifest(const std::filesystem::path& dir, const StudyConfig& c,
                           const std::string& command) {
  write_json(dir / "manifest.json", make_manifest(c, command));
}

inline void say(const RunOptions& o, const std::string& msg) {
  if (o.verbose && o.log) *o.log << "[jdsn] " << msg << '\n';
}

inline json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(row);
  }
  return rows;
}

inline json vector_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

inline json point_json(const model::ParameterPoint& p) {
  return {{"mu", vector_json(p.mu)}, {"sigma", vector_json(p.sigma)}, {"alpha", vector_json(p.alpha)}};
}

inline void write_path_csv(std::ostream& os, const simulate::ObservationRecord& obs) {
  os << "t,x\n";
  for (std::size_t k = 0; k < obs.values.size(); ++k) {
    os << mcstudy::format_double(obs.times[k]) << ',' << mcstudy::format_double(obs.values[k])
       << '\n';
  }
}

inline void write_jumps_csv(std::ostream& os, const simulate::SimulatedTruth& t) {
  os << "jump_time,mark,interval_index\n";
  for (std::size_t i = 0; i < t.jump_times.size(); ++i) {
    os << mcstudy::format_double(t.jump_times[i]) << ',' << mcstudy::format_double(t.jump_marks[i])
       << ',' << t.jump_interval[i] << '\n';
  }
}

/// Reads a path written by `simulate`: header row, then t,x per line (extra
/// leading columns are ignored).
inline simulate::ObservationRecord read_path_csv(const std::string& path, double epsilon) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Configuration, "cannot open observations '" + path + "'");
  simulate::ObservationRecord obs;
  obs.epsilon = epsilon;
  std::string line;
  std::getline(in, line);  // header
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() < 2) {
      fail(ErrorKind::Configuration, path + ":" + std::to_string(lineno) + ": expected t,x");
    }
    try {
      obs.times.push_back(std::stod(fields[fields.size() - 2]));
      obs.values.push_back(std::stod(fields.back()));
    } catch (const std::exception&) {
      fail(ErrorKind::Configuration, path + ":" + std::to_string(lineno) + ": not a number");
    }
  }
  if (obs.values.size() < 3) fail(ErrorKind::Configuration, "observations need n >= 2 intervals");
  obs.n = static_cast<int>(obs.values.size()) - 1;
  return obs;
}

inline model::ModelSpec build_model(const StudyConfig& c) {
  return model::make_builtin_model(c.model_id, c.model_options);
}

inline void check_rho_or_fail(const model::ModelSpec& m, double rho) {
  const auto v = model::validate_rho(m.density, rho);
  if (!v.admissible) fail(ErrorKind::Configuration, v.reason);
}

}  // namespace detail

/// One path per replication; replication i uses seed derive_seed(seed, i),
/// the same path `mc` sees for that row.
inline int cmd_simulate(const StudyConfig& c, const RunOptions& o) {
  const auto dir = detail::prepare_out(c, o);
  const auto m = detail::build_model(c);
  const std::size_t reps = c.reps.value_or(1);
  for (std::size_t i = 0; i < reps; ++i) {
    const auto r = mcstudy::replication_regime(c.regime, c.seed, i);
    const auto sim = simulate::simulate_path(m, c.theta0, r, c.simulation);
    const std::string suffix = c.reps ? "_" + std::to_string(i) : "";
    auto ps = detail::open_out(dir / ("path" + suffix + ".csv"));
    detail::write_path_csv(ps, sim.observations);
    auto js = detail::open_out(dir / ("jumps" + suffix + ".csv"));
    detail::write_jumps_csv(js, sim.truth);
    for (const auto& w : sim.truth.warnings) detail::say(o, "warning: " + w);
    detail::say(o, "path " + std::to_string(i) + ": " + std::to_string(sim.truth.jump_count()) +
                       " jumps");
  }
  detail::write_manifest(dir, c, "simulate");
  return kExitOk;
}

inline int cmd_estimate(const StudyConfig& c, const RunOptions& o) {
  const auto dir = detail::prepare_out(c, o);
  const auto m = detail::build_model(c);
  detail::check_rho_or_fail(m, c.regime.rho);
  model::RegimeConfig r = mcstudy::replication_regime(c.regime, c.seed, 0);
  simulate::ObservationRecord obs;
  if (!c.observations.empty()) {
    obs = detail::read_path_csv(c.observations, c.regime.epsilon);
    r.n = obs.n;
  } else {
    obs = simulate::simulate_path(m, c.theta0, r, c.simulation).observations;
  }
  const auto labels = estimate::classify_increments(obs, r, m.density.support);
  const auto est = estimate::maximize_contrast(obs, labels, m, r, c.estimate);
  const estimate::Contrast psi(obs, labels, m, est.lambda_used);
  json j = {{"theta_hat", detail::point_json(est.theta_hat)},
            {"contrast_value", est.contrast_value},
            {"lambda_hat", est.lambda_hat},
            {"lambda_used", est.lambda_used},
            {"converged", est.converged},
            {"iterations", est.iterations},
            {"restarts", est.restarts},
            {"n", obs.n},
            {"n_c", est.n_c},
            {"n_d", est.n_d},
            {"threshold", labels.threshold},
            {"observed_information", detail::matrix_json(fisher::observed_information(psi, est.theta_hat))}};
  detail::write_json(dir / "estimate.json", j);
  detail::write_manifest(dir, c, "estimate");
  detail::say(o, "estimate written; converged=" + std::string(est.converged ? "true" : "false"));
  return kExitOk;
}

inline int cmd_fisher(const StudyConfig& c, const RunOptions& o) {
  const auto dir = detail::prepare_out(c, o);
  const auto m = detail::build_model(c);
  const auto info = fisher::fisher_information(m, c.theta0, c.fisher_time_steps, c.quad);
  const Matrix a = info.assembled();
  {
    auto os = detail::open_out(dir / "fisher.csv");
    fisher::write_matrix_csv(os, a, info.d1(), info.d2(), info.d3());
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  bool pd = true;
  try {
    fisher::require_positive_definite(a);
  } catch (const Error&) {
    pd = false;
  }
  detail::write_json(dir / "fisher.json", {{"I1", detail::matrix_json(info.I1)},
                                           {"I2", detail::matrix_json(info.I2)},
                                           {"I3", detail::matrix_json(info.I3)},
                                           {"assembled", detail::matrix_json(a)},
                                           {"eigenvalues", detail::vector_json(es.eigenvalues())},
                                           {"positive_definite", pd}});
  detail::write_manifest(dir, c, "fisher");
  return kExitOk;
}

inline int cmd_mc(const StudyConfig& c, const RunOptions& o) {
  const auto dir = detail::prepare_out(c, o);
  const auto m = detail::build_model(c);
  mcstudy::StudyOptions so;
  so.estimate = c.estimate;
  so.simulation = c.simulation;
  so.workers = o.workers;
  const std::size_t reps = c.reps.value_or(100);

  if (!c.ladder.empty()) {
    for (const auto& r : c.ladder) detail::check_rho_or_fail(m, r.rho);
    detail::say(o, "ladder with " + std::to_string(c.ladder.size()) + " rungs, " +
                       std::to_string(reps) + " reps each");
    const auto rep = mcstudy::consistency_ladder(m, c.theta0, c.ladder, reps, c.seed, so);
    {
      auto os = detail::open_out(dir / "ladder.csv");
      mcstudy::write_ladder_csv(os, rep);
    }
    for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
      auto os = detail::open_out(dir / ("mc_table_rung" + std::to_string(i) + ".csv"));
      mcstudy::write_table_csv(os, rep.rungs[i].table);
    }
    json conditions = json::array();
    for (const auto& cond : rep.diagnostics.conditions) {
      conditions.push_back({{"name", cond.name},
                            {"wanted", cond.wanted},
                            {"values", cond.values},
                            {"trend", std::string(model::to_string(cond.trend))},
                            {"blocking", cond.blocking}});
    }
    json j = {{"conditions", conditions}, {"notes", rep.diagnostics.notes}};
    if (rep.verdict) {
      j["verdict"] = *rep.verdict;
      j["shrink"] = detail::vector_json(rep.shrink);
      j["component_ok"] = rep.component_ok;
    } else {
      j["verdict"] = nullptr;
    }
    detail::write_json(dir / "ladder.json", j);
    detail::write_manifest(dir, c, "mc");
    return kExitOk;
  }

  detail::say(o, "running " + std::to_string(reps) + " replications on " +
                     std::to_string(o.workers) + " worker(s)");
  const auto table = mcstudy::run_replications(m, c.theta0, c.regime, reps, c.seed, so);
  {
    auto os = detail::open_out(dir / "mc_table.csv");
    mcstudy::write_table_csv(os, table);
  }
  if (c.normality) {
    const std::size_t used = table.converged_count();
    if (used < 100) {
      detail::write_json(dir / "normality.json",
                         {{"skipped", "normality diagnostics need at least 100 converged rows"},
                          {"rows_total", table.rows.size()},
                          {"rows_used", used}});
    } else {
      const auto info = fisher::fisher_information(m, c.theta0, c.fisher_time_steps, c.quad);
      const auto rep = mcstudy::normality_diagnostics(table, info);
      json ks = json::array();
      for (const auto& k : rep.ks) ks.push_back({{"statistic", k.statistic}, {"p_value", k.p_value}});
      detail::write_json(dir / "normality.json",
                         {{"rows_total", rep.rows_total},
                          {"rows_used", rep.rows_used},
                          {"mean", detail::vector_json(rep.mean)},
                          {"covariance", detail::matrix_json(rep.covariance)},
                          {"target_covariance", detail::matrix_json(rep.target)},
                          {"relative_covariance_error", rep.relative_cov_error},
                          {"ks", ks},
                          {"ks_level", rep.ks_level},
                          {"ks_passes", rep.ks_passes()},
                          {"flags", rep.flags}});
      auto os = detail::open_out(dir / "qq.csv");
      mcstudy::write_qq_csv(os, table, info.assembled());
    }
  }
  detail::write_manifest(dir, c, "mc");
  detail::say(o, std::to_string(table.converged_count()) + " of " + std::to_string(reps) +
                     " rows converged");
  return kExitOk;
}

/// Admissible-rho report; exit 2 when rho (or the ladder) is refused.
inline int cmd_check_rho(const StudyConfig& c, const RunOptions& o) {
  const auto dir = detail::prepare_out(c, o);
  const auto m = detail::build_model(c);
  bool ok = true;
  json checks = json::array();
  std::vector<model::RegimeConfig> regimes = c.ladder.empty()
                                                 ? std::vector<model::RegimeConfig>{c.regime}
                                                 : c.ladder;
  for (const auto& r : regimes) {
    const auto v = model::validate_rho(m.density, r.rho);
    ok = ok && v.admissible;
    checks.push_back({{"rho", r.rho},
                      {"admissible", v.admissible},
                      {"interval", {v.lower, v.upper}},
                      {"reason", v.reason}});
  }
  json j = {{"family", std::string(model::family_id(m.density.kind))}, {"checks", checks}};
  if (!c.ladder.empty()) {
    const auto d = model::validate_regime_ladder(c.ladder, {m.density, c.theta0.alpha, 1.0});
    json conds = json::array();
    for (const auto& cond : d.conditions) {
      conds.push_back({{"name", cond.name},
                       {"trend", std::string(model::to_string(cond.trend))},
                       {"blocking", cond.blocking},
                       {"values", cond.values}});
    }
    j["ladder"] = {{"refused", d.refused()}, {"conditions", conds}, {"notes", d.notes}};
    ok = ok && !d.refused();
  }
  j["admissible"] = ok;
  detail::write_json(dir / "check_rho.json", j);
  detail::write_manifest(dir, c, "check-rho");
  if (o.report) *o.report << j.dump(2) << '\n';
  return ok ? kExitOk : kExitConfig;
}

/// Runs one subcommand and maps failures to exit codes, printing the error
/// as JSON on the log stream.
inline int run_command(const std::string& command, const std::string& config_path,
                       std::optional<std::uint64_t> seed_override, const RunOptions& o) {
  try {
    StudyConfig c = load_config(config_path);
    if (seed_override) c.seed = *seed_override;
    if (command == "simulate") return cmd_simulate(c, o);
    if (command == "estimate") return cmd_estimate(c, o);
    if (command == "fisher") return cmd_fisher(c, o);
    if (command == "mc") return cmd_mc(c, o);
    if (command == "check-rho") return cmd_check_rho(c, o);
    fail(ErrorKind::Configuration, "unknown command '" + command + "'");
  } catch (const Error& e) {
    const int code = exit_code_for(e.kind());
    if (o.log) *o.log << error_json(to_string(e.kind()), e.what(), code).dump() << '\n';
    return code;
  } catch (const json::exception& e) {
    if (o.log) *o.log << error_json("configuration", e.what(), kExitConfig).dump() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    if (o.log) *o.log << error_json("internal", e.what(), kExitNumerical).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace jdsn::cli
