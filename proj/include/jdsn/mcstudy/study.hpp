#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/estimate/estimator.hpp"
#include "jdsn/mcstudy/parallel.hpp"
#include "jdsn/model/model_spec.hpp"
#include "jdsn/model/regime.hpp"
#include "jdsn/simulate/rng.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::mcstudy {

struct StudyOptions {
  estimate::EstimateOptions estimate;
  simulate::SimulationOptions simulation;
  int workers = 1;
  double max_failure_fraction = 0.2;
};

struct ReplicationRow {
  std::size_t rep = 0;
  std::uint64_t seed = 0;
  Vector theta_hat;
  double lambda_hat = 0.0;
  std::size_t n_d = 0;
  std::size_t jumps = 0;  // true number of jumps in the simulated path
  bool converged = false;
  Vector std_error;  // empty when the row failed
  std::string error;

  bool failed() const { return !error.empty(); }
};

struct McTable {
  std::string model_id;
  model::ParameterPoint theta0;
  model::RegimeConfig regime;
  std::uint64_t master_seed = 0;
  std::vector<ReplicationRow> rows;

  std::size_t converged_count() const {
    std::size_t c = 0;
    for (const auto& r : rows) c += (r.converged && !r.failed());
    return c;
  }
  std::size_t failure_count() const {
    std::size_t c = 0;
    for (const auto& r : rows) c += r.failed();
    return c;
  }
};

/// Diagonal of the rate matrix: (1/eps per mu, sqrt(n) per sigma,
/// sqrt(lambda) per alpha).
inline Vector rate_scaling(const model::ParameterPoint& theta0, const model::RegimeConfig& regime) {
  Vector s(static_cast<Eigen::Index>(theta0.dim()));
  const auto d1 = static_cast<Eigen::Index>(theta0.d1());
  const auto d2 = static_cast<Eigen::Index>(theta0.d2());
  const auto d3 = static_cast<Eigen::Index>(theta0.d3());
  s.segment(0, d1).setConstant(1.0 / regime.epsilon);
  s.segment(d1, d2).setConstant(std::sqrt(static_cast<double>(regime.n)));
  s.segment(d1 + d2, d3).setConstant(std::sqrt(regime.lambda));
  return s;
}

inline Vector standardize(const Vector& theta_hat, const model::ParameterPoint& theta0,
                          const model::RegimeConfig& regime) {
  return (rate_scaling(theta0, regime).array() * (theta_hat - theta0.concat()).array()).matrix();
}

inline Vector unstandardize(const Vector& e, const model::ParameterPoint& theta0,
                            const model::RegimeConfig& regime) {
  return theta0.concat() + (e.array() / rate_scaling(theta0, regime).array()).matrix();
}

/// Regime of replication `index`: same rates, derived seed.
inline model::RegimeConfig replication_regime(const model::RegimeConfig& regime,
                                              std::uint64_t master_seed, std::size_t index) {
  model::RegimeConfig r = regime;
  r.seed = rng::derive_seed(master_seed, index);
  return r;
}

/// simulate -> classify -> maximise for one replication; numerical failures
/// are recorded on the row.
inline ReplicationRow run_replication(const model::ModelSpec& model,
                                      const model::ParameterPoint& theta0,
                                      const model::RegimeConfig& regime, std::uint64_t master_seed,
                                      std::size_t index, const StudyOptions& opts = {}) {
  ReplicationRow row;
  row.rep = index;
  const auto r = replication_regime(regime, master_seed, index);
  row.seed = r.seed;
  try {
    const auto sim = simulate::simulate_path(model, theta0, r, opts.simulation);
    row.jumps = sim.truth.jump_count();
    const auto est = estimate::maximize_contrast(sim.observations, model, r, opts.estimate);
    row.theta_hat = est.theta_hat.concat();
    row.lambda_hat = est.lambda_hat;
    row.n_d = est.n_d;
    row.converged = est.converged;
    row.std_error = standardize(row.theta_hat, theta0, r);
    if (!row.std_error.allFinite()) {
      row.converged = false;
      row.error = "non-finite standardized error";
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Configuration) throw;
    row.error = std::string(to_string(e.kind())) + ": " + e.what();
    row.converged = false;
  }
  return row;
}

inline McTable run_replications(const model::ModelSpec& model, const model::ParameterPoint& theta0,
                                const model::RegimeConfig& regime, std::size_t reps,
                                std::uint64_t master_seed, const StudyOptions& opts = {}) {
  if (reps < 1) fail(ErrorKind::Configuration, "reps must be >= 1");
  model.validate();
  model.require_point(theta0);
  regime.validate();
  const auto verdict = model::validate_rho(model.density, regime.rho);
  if (!verdict.admissible) fail(ErrorKind::Configuration, verdict.reason);

  McTable table;
  table.model_id = model.id;
  table.theta0 = theta0;
  table.regime = regime;
  table.master_seed = master_seed;
  table.rows.resize(reps);
  parallel_for(reps, opts.workers, [&](std::size_t i) {
    table.rows[i] = run_replication(model, theta0, regime, master_seed, i, opts);
  });
  const auto failures = table.failure_count();
  if (static_cast<double>(failures) > opts.max_failure_fraction * static_cast<double>(reps)) {
    std::string first;
    for (const auto& r : table.rows) {
      if (r.failed()) {
        first = r.error;
        break;
      }
    }
    fail(ErrorKind::Study, std::to_string(failures) + " of " + std::to_string(reps) +
                               " replications failed (first: " + first + ")");
  }
  return table;
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// One row per replication, full round-trip precision.
inline void write_table_csv(std::ostream& os, const McTable& t) {
  const auto d = t.theta0.dim();
  os << "rep,seed,converged,lambda_hat,n_d,jumps";
  for (std::size_t j = 0; j < d; ++j) os << ",theta_hat_" << j;
  for (std::size_t j = 0; j < d; ++j) os << ",std_error_" << j;
  os << ",error\n";
  for (const auto& r : t.rows) {
    os << r.rep << ',' << r.seed << ',' << (r.converged ? 1 : 0) << ','
       << format_double(r.lambda_hat) << ',' << r.n_d << ',' << r.jumps;
    for (std::size_t j = 0; j < d; ++j) {
      os << ',' << (r.failed() ? "nan" : format_double(r.theta_hat[static_cast<Eigen::Index>(j)]));
    }
    for (std::size_t j = 0; j < d; ++j) {
      os << ',' << (r.failed() ? "nan" : format_double(r.std_error[static_cast<Eigen::Index>(j)]));
    }
    std::string err = r.error;
    for (auto& ch : err) {
      if (ch == ',' || ch == '\n' || ch == '"') ch = ' ';
    }
    os << ',' << err << '\n';
  }
}

}  // namespace jdsn::mcstudy
