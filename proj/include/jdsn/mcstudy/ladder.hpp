#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/mcstudy/study.hpp"
#include "jdsn/model/regime.hpp"

namespace jdsn::mcstudy {

struct LadderRung {
  model::RegimeConfig regime;
  std::size_t reps = 0;
  std::size_t used = 0;  // converged rows entering the RMSE
  Vector rmse;           // raw errors theta_hat - theta0
  McTable table;
};

struct LadderReport {
  model::LadderDiagnostics diagnostics;
  std::vector<LadderRung> rungs;
  std::optional<bool> verdict;  // empty for a single rung
  std::vector<bool> component_ok;
  Vector shrink;  // first-rung RMSE over last-rung RMSE

  bool has_verdict() const { return verdict.has_value(); }
};

inline Vector raw_rmse(const McTable& t) {
  const auto d = static_cast<Eigen::Index>(t.theta0.dim());
  Vector acc = Vector::Zero(d);
  std::size_t used = 0;
  for (const auto& r : t.rows) {
    if (r.failed() || !r.converged) continue;
    acc += (r.theta_hat - t.theta0.concat()).array().square().matrix();
    ++used;
  }
  if (used == 0) return Vector::Constant(d, std::nan(""));
  return (acc / static_cast<double>(used)).cwiseSqrt();
}

/// Non-increasing RMSE with at most one rung allowed to rise, by <= 10%.
inline bool rmse_non_increasing(const std::vector<double>& v) {
  int rises = 0;
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!std::isfinite(v[i]) || !std::isfinite(v[i - 1])) return false;
    if (v[i] > v[i - 1]) {
      if (v[i] > 1.1 * v[i - 1]) return false;
      ++rises;
    }
  }
  return rises <= 1;
}

/// Replications at every rung; the ladder is checked before any simulation.
/// Rung r uses master seed derive_seed(master_seed, r).
inline LadderReport consistency_ladder(const model::ModelSpec& model,
                                       const model::ParameterPoint& theta0,
                                       const std::vector<model::RegimeConfig>& ladder,
                                       std::size_t reps, std::uint64_t master_seed,
                                       const StudyOptions& opts = {}, double c1 = 1.0) {
  LadderReport out;
  out.diagnostics = model::validate_regime_ladder(ladder, {model.density, theta0.alpha, c1});
  if (out.diagnostics.refused()) {
    std::string why;
    for (const auto& n : out.diagnostics.notes) why += (why.empty() ? "" : "; ") + n;
    fail(ErrorKind::Configuration, "regime ladder refused: " + why);
  }
  for (std::size_t i = 0; i < ladder.size(); ++i) {
    LadderRung rung;
    rung.regime = ladder[i];
    rung.reps = reps;
    rung.table = run_replications(model, theta0, ladder[i], reps, rng::derive_seed(master_seed, i),
                                  opts);
    rung.used = rung.table.converged_count();
    rung.rmse = raw_rmse(rung.table);
    out.rungs.push_back(std::move(rung));
  }
  if (ladder.size() < 2) return out;
  const auto d = static_cast<Eigen::Index>(theta0.dim());
  out.shrink = (out.rungs.front().rmse.array() / out.rungs.back().rmse.array()).matrix();
  bool all = true;
  for (Eigen::Index j = 0; j < d; ++j) {
    std::vector<double> col;
    for (const auto& r : out.rungs) col.push_back(r.rmse[j]);
    const bool ok = rmse_non_increasing(col);
    out.component_ok.push_back(ok);
    all = all && ok;
  }
  out.verdict = all;
  return out;
}

inline void write_ladder_csv(std::ostream& os, const LadderReport& rep) {
  if (rep.rungs.empty()) return;
  const auto d = rep.rungs.front().rmse.size();
  os << "rung,n,epsilon,lambda,rho,v,reps,used";
  for (Eigen::Index j = 0; j < d; ++j) os << ",rmse_" << j;
  os << '\n';
  for (std::size_t i = 0; i < rep.rungs.size(); ++i) {
    const auto& r = rep.rungs[i];
    os << i << ',' << r.regime.n << ',' << format_double(r.regime.epsilon) << ','
       << format_double(r.regime.lambda) << ',' << format_double(r.regime.rho) << ','
       << format_double(r.regime.v) << ',' << r.reps << ',' << r.used;
    for (Eigen::Index j = 0; j < d; ++j) os << ',' << format_double(r.rmse[j]);
    os << '\n';
  }
}

}  // namespace jdsn::mcstudy
