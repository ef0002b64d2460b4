#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/density.hpp"
#include "jdsn/model/regime.hpp"
#include "jdsn/simulate/simulate.hpp"

namespace jdsn::estimate {

enum class Label : unsigned char { C, D };

/// Per-interval continuous/jump classification of Delta_k X.
struct FilterLabels {
  std::vector<Label> labels;  // index k - 1
  double threshold = 0.0;     // on the raw increment
  model::SupportKind support = model::SupportKind::WholeLine;

  std::size_t size() const { return labels.size(); }
  bool is_jump(std::size_t i) const { return labels[i] == Label::D; }

  std::size_t count_d() const {
    std::size_t c = 0;
    for (auto l : labels) c += (l == Label::D);
    return c;
  }
  std::size_t count_c() const { return labels.size() - count_d(); }
};

/// Two-sided rule for whole-line jumps, one-sided (upward) for half-line
/// jumps; equality with the threshold counts as continuous.
inline FilterLabels classify_increments(const simulate::ObservationRecord& obs,
                                        const model::RegimeConfig& regime,
                                        model::SupportKind support) {
  if (obs.n != regime.n) {
    fail(ErrorKind::Configuration, "observation count " + std::to_string(obs.n) +
                                       " does not match regime n=" +
                                       std::to_string(regime.n));
  }
  if (obs.values.size() != static_cast<std::size_t>(obs.n) + 1) {
    fail(ErrorKind::Configuration, "observation record is truncated");
  }
  FilterLabels out;
  out.threshold = regime.increment_threshold();
  out.support = support;
  out.labels.resize(static_cast<std::size_t>(obs.n));
  for (int k = 1; k <= obs.n; ++k) {
    const double dx = obs.increment(k);
    const bool jump = support == model::SupportKind::WholeLine ? std::abs(dx) > out.threshold
                                                               : dx > out.threshold;
    out.labels[static_cast<std::size_t>(k - 1)] = jump ? Label::D : Label::C;
  }
  return out;
}

/// Jump-count estimate of the intensity: the number of D intervals.
inline double estimate_intensity(const FilterLabels& labels) {
  return static_cast<double>(labels.count_d());
}

}  // namespace jdsn::estimate
