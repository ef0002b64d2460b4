#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/model_spec.hpp"
#include "jdsn/model/parameters.hpp"
#include "jdsn/model/regime.hpp"
#include "jdsn/simulate/rng.hpp"

namespace jdsn::simulate {

/// Discrete observations X_{t_0}, ..., X_{t_n} with t_k = k / n.
struct ObservationRecord {
  int n = 0;
  double epsilon = 0.0;
  std::vector<double> times;
  std::vector<double> values;

  /// Delta_k X for k = 1..n, stored at index k - 1.
  double increment(int k) const {
    return values[static_cast<std::size_t>(k)] - values[static_cast<std::size_t>(k - 1)];
  }
};

/// Ground truth kept alongside a simulated path.
struct SimulatedTruth {
  std::vector<double> jump_times;
  std::vector<double> jump_marks;
  std::vector<int> jump_interval;  // 1-based interval index of each jump
  std::vector<int> interval_counts;  // Delta_k N, index k - 1
  std::vector<double> first_jump;    // tau_k (t_k when the interval has no jump)
  std::vector<double> last_jump;     // eta_k (t_{k-1} when the interval has no jump)
  std::vector<double> wiener_increments;  // W_{t_k} - W_{t_{k-1}} (optional)
  std::vector<std::string> warnings;

  std::size_t jump_count() const { return jump_times.size(); }
};

struct SimulationResult {
  ObservationRecord observations;
  SimulatedTruth truth;
};

struct SimulationOptions {
  int substeps = 16;  // power of two
  bool retain_wiener = false;
  double divergence_bound = 1e12;
};

/// Brownian motion built interval by interval by midpoint refinement. Every
/// node value is a fixed function of (seed, interval, level, index), so a
/// finer substep grid sees the same Brownian path as a coarser one.
class BrownianPath {
 public:
  static constexpr std::uint32_t kTagBrownian = 0x0B0B0001u;
  static constexpr std::uint32_t kTagBridge = 0x0B0B0002u;

  BrownianPath(std::uint64_t seed, int n) : key_(rng::key_from_seed(seed)), n_(n) {}

  /// W at the substep nodes of interval k (1-based), relative to W_{t_{k-1}};
  /// `substeps` must be a power of two.
  void interval_nodes(int k, int substeps, std::vector<double>& w) const {
    const auto m = static_cast<std::size_t>(substeps);
    w.assign(m + 1, 0.0);
    const double dt = 1.0 / static_cast<double>(n_);
    w[m] = std::sqrt(dt) * draw(k, 0, 0);
    std::uint32_t level = 1;
    for (std::size_t step = m / 2; step >= 1; step /= 2, ++level) {
      // parent interval length 2 * step substeps; midpoint variance = len / 4
      const double parent = dt * static_cast<double>(2 * step) / static_cast<double>(m);
      const double sd = std::sqrt(parent / 4.0);
      std::uint32_t idx = 0;
      for (std::size_t j = step; j < m; j += 2 * step, ++idx) {
        w[j] = 0.5 * (w[j - step] + w[j + step]) + sd * draw(k, level, idx);
      }
      if (step == 1) break;
    }
  }

  /// Standard normal used to bridge to the j-th jump time of the path.
  double bridge_normal(int k, std::size_t jump_index) const {
    return rng::normal_at(key_, {static_cast<std::uint32_t>(k),
                                 static_cast<std::uint32_t>(jump_index), 0u, kTagBridge});
  }

  double draw(int k, std::uint32_t level, std::uint32_t index) const {
    return rng::normal_at(key_, {static_cast<std::uint32_t>(k), index, level, kTagBrownian});
  }

 private:
  rng::Key key_;
  int n_;
};

/// Stream id for jump times and marks.
inline constexpr std::uint64_t kJumpStream = 0x4A554D50ull;

/// Poisson(lambda) arrival times on [0, 1] and i.i.d. marks from f_alpha0.
inline void draw_jumps(const model::ModelSpec& model, const Vector& alpha0, double lambda,
                       std::uint64_t seed, std::vector<double>& times,
                       std::vector<double>& marks) {
  times.clear();
  marks.clear();
  if (!(lambda > 0.0)) return;
  rng::PhiloxEngine engine(seed, kJumpStream);
  std::exponential_distribution<double> gap(lambda);
  double t = gap(engine);
  while (t < 1.0) {
    times.push_back(t);
    t += gap(engine);
  }
  const auto p = model.density.native(alpha0);
  marks.reserve(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    marks.push_back(model::sample_mark(model.density.kind, p, engine));
  }
}

inline SimulationResult simulate_path(const model::ModelSpec& model,
                                      const model::ParameterPoint& theta0,
                                      const model::RegimeConfig& regime,
                                      const SimulationOptions& opts = {}) {
  model.require_point(theta0);
  if (regime.n < 1) fail(ErrorKind::Configuration, "simulation needs n >= 1");
  if (!(regime.epsilon >= 0.0) || !(regime.lambda >= 0.0)) {
    fail(ErrorKind::Configuration, "epsilon and lambda must be non-negative");
  }
  if (opts.substeps < 1 || !std::has_single_bit(static_cast<unsigned>(opts.substeps))) {
    fail(ErrorKind::Configuration, "substeps must be a power of two >= 1");
  }
  model::require_admissible(model.density.kind, model.density.native(theta0.alpha));

  const int n = regime.n;
  const int m = opts.substeps;
  const double eps = regime.epsilon;
  const double dt = 1.0 / static_cast<double>(n);
  const double h = dt / static_cast<double>(m);

  SimulationResult out;
  auto& obs = out.observations;
  auto& truth = out.truth;
  obs.n = n;
  obs.epsilon = eps;
  obs.times.resize(static_cast<std::size_t>(n) + 1);
  obs.values.resize(static_cast<std::size_t>(n) + 1);

  draw_jumps(model, theta0.alpha, regime.lambda, regime.seed, truth.jump_times,
             truth.jump_marks);
  truth.interval_counts.assign(static_cast<std::size_t>(n), 0);
  truth.first_jump.resize(static_cast<std::size_t>(n));
  truth.last_jump.resize(static_cast<std::size_t>(n));
  truth.jump_interval.resize(truth.jump_times.size());
  if (opts.retain_wiener) truth.wiener_increments.resize(static_cast<std::size_t>(n));

  const BrownianPath brownian(regime.seed, n);
  const Vector& mu = theta0.mu;
  const Vector& sigma = theta0.sigma;
  const Vector& alpha = theta0.alpha;

  double x = model.x0;
  const double c_sign0 = std::copysign(1.0, model.jump_scale(x, alpha));
  bool warned_b = false, warned_c = false;
  const auto check_state = [&](double state, double t) {
    if (!std::isfinite(state) || std::abs(state) > opts.divergence_bound) {
      fail(ErrorKind::SimulationDiverged,
           "path left |X| <= " + std::to_string(opts.divergence_bound) + " at t=" +
               std::to_string(t));
    }
    if (!warned_b && model.diffusion(state, sigma) == 0.0) {
      truth.warnings.push_back("diffusion coefficient vanished at t=" + std::to_string(t));
      warned_b = true;
    }
    const double cv = model.jump_scale(state, alpha);
    if (!warned_c && (cv == 0.0 || std::copysign(1.0, cv) != c_sign0)) {
      truth.warnings.push_back("jump scale vanished or changed sign at t=" +
                               std::to_string(t));
      warned_c = true;
    }
  };
  const auto em_step = [&](double state, double len, double dw) {
    return state + model.drift(state, mu) * len + eps * model.diffusion(state, sigma) * dw;
  };

  std::vector<double> w;
  std::size_t next_jump = 0;
  obs.times[0] = 0.0;
  obs.values[0] = x;
  for (int k = 1; k <= n; ++k) {
    const double t_start = static_cast<double>(k - 1) * dt;
    const double t_end = static_cast<double>(k) * dt;
    brownian.interval_nodes(k, m, w);
    const auto ki = static_cast<std::size_t>(k - 1);
    truth.first_jump[ki] = t_end;
    truth.last_jump[ki] = t_start;
    for (int j = 0; j < m; ++j) {
      double s = t_start + static_cast<double>(j) * h;
      const double s_end = (j + 1 == m) ? t_end : t_start + static_cast<double>(j + 1) * h;
      double w_now = w[static_cast<std::size_t>(j)];
      const double w_end = w[static_cast<std::size_t>(j) + 1];
      while (next_jump < truth.jump_times.size() && truth.jump_times[next_jump] < s_end &&
             (k == n || truth.jump_times[next_jump] < t_end)) {
        const double tau = truth.jump_times[next_jump];
        // Brownian bridge from (s, w_now) to (s_end, w_end) evaluated at tau.
        const double span = s_end - s;
        const double frac = (tau - s) / span;
        const double var = std::max((tau - s) * (s_end - tau) / span, 0.0);
        const double w_tau = w_now + frac * (w_end - w_now) +
                             std::sqrt(var) * brownian.bridge_normal(k, next_jump);
        x = em_step(x, tau - s, w_tau - w_now);
        x += eps * model.jump_scale(x, alpha) * truth.jump_marks[next_jump];
        check_state(x, tau);
        truth.jump_interval[next_jump] = k;
        truth.interval_counts[ki] += 1;
        if (truth.interval_counts[ki] == 1) truth.first_jump[ki] = tau;
        truth.last_jump[ki] = tau;
        s = tau;
        w_now = w_tau;
        ++next_jump;
      }
      x = em_step(x, s_end - s, w_end - w_now);
      check_state(x, s_end);
    }
    if (opts.retain_wiener) truth.wiener_increments[ki] = w[static_cast<std::size_t>(m)];
    obs.times[static_cast<std::size_t>(k)] = t_end;
    obs.values[static_cast<std::size_t>(k)] = x;
  }
  return out;
}

}  // namespace jdsn::simulate
