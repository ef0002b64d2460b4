#include <catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "jdsn/model/builtin.hpp"
#include "jdsn/simulate/limit_path.hpp"
#include "jdsn/simulate/rng.hpp"
#include "jdsn/simulate/simulate.hpp"

using namespace jdsn;
using Catch::Matchers::WithinAbs;

namespace {

model::ParameterPoint ou_gamma_theta() {
  return {Vector::Constant(1, 1.0), Vector::Constant(1, 1.0), Vector{{1.0, 2.0}}};
}

model::RegimeConfig regime(int n, double eps, double lambda, std::uint64_t seed) {
  model::RegimeConfig r;
  r.n = n;
  r.epsilon = eps;
  r.lambda = lambda;
  r.seed = seed;
  return r;
}

}  // namespace

TEST_CASE("Philox4x32-10 known-answer vectors", "[simulate][rng]") {
  using rng::Counter;
  CHECK(rng::philox4x32({0, 0, 0, 0}, {0, 0}) ==
        Counter{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(rng::philox4x32({0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                        {0xffffffffu, 0xffffffffu}) ==
        Counter{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(rng::philox4x32({0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                        {0xa4093822u, 0x299f31d0u}) ==
        Counter{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("derived seeds are distinct and stable", "[simulate][rng]") {
  CHECK(rng::derive_seed(1, 0) == rng::derive_seed(1, 0));
  CHECK(rng::derive_seed(1, 0) != rng::derive_seed(1, 1));
  CHECK(rng::derive_seed(1, 0) != rng::derive_seed(2, 0));
  rng::PhiloxEngine a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    const auto va = a(), vb = b();
    CHECK(va == vb);
    (void)c();
  }
  CHECK(rng::PhiloxEngine(7, 3)() != rng::PhiloxEngine(7, 4)());
}

TEST_CASE("limit path solves the drift ODE", "[simulate][limit]") {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto p = simulate::solve_limit_path(m, Vector::Constant(1, 1.0), 1000);
  double err = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    err = std::max(err, std::abs(p.values[i] - std::exp(-p.grid[i])));
  }
  CHECK(err < 1e-10);
  const auto p2 = simulate::solve_limit_path(m, Vector::Constant(1, 1.0), 1999);
  double diff = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) diff = std::max(diff, std::abs(p.values[i] - p2.values[2 * i]));
  CHECK(diff < 1e-10);

  auto flat = m;
  flat.drift = model::constant_coefficient(1, 0.0);
  const auto pf = simulate::solve_limit_path(flat, Vector::Constant(1, 1.0), 11);
  for (double v : pf.values) CHECK(v == 1.0);

  auto ramp = m;
  ramp.drift = model::constant_drift();
  ramp.x0 = 0.0;
  const auto pr = simulate::solve_limit_path(ramp, Vector::Constant(1, 2.0), 101);
  CHECK_THAT(pr.values.back(), WithinAbs(2.0, 1e-12));
  CHECK_THROWS_AS(simulate::solve_limit_path(m, Vector::Constant(1, 1.0), 1), Error);

  auto bad = m;
  bad.drift.value = [](double, const Vector&) { return std::nan(""); };
  try {
    simulate::solve_limit_path(bad, Vector::Constant(1, 1.0), 5);
    FAIL("expected a model error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::Model);
  }
}

TEST_CASE("simulation is deterministic and well formed", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto r = regime(200, 0.05, 20, 99);
  const auto a = simulate::simulate_path(m, ou_gamma_theta(), r);
  const auto b = simulate::simulate_path(m, ou_gamma_theta(), r);
  CHECK(a.observations.values == b.observations.values);
  CHECK(a.truth.jump_times == b.truth.jump_times);
  const auto& obs = a.observations;
  REQUIRE(obs.values.size() == 201);
  CHECK(obs.times.front() == 0.0);
  CHECK(obs.times.back() == 1.0);
  CHECK(obs.values.front() == m.x0);
  const auto& t = a.truth;
  CHECK(std::is_sorted(t.jump_times.begin(), t.jump_times.end()));
  CHECK(t.jump_marks.size() == t.jump_times.size());
  CHECK(std::accumulate(t.interval_counts.begin(), t.interval_counts.end(), 0) ==
        static_cast<int>(t.jump_count()));
  for (std::size_t i = 0; i < t.jump_count(); ++i) {
    const int k = t.jump_interval[i];
    CHECK(t.jump_times[i] >= (k - 1) / 200.0);
    CHECK(t.jump_times[i] <= k / 200.0);
  }
  for (int k = 1; k <= 200; ++k) {
    const auto i = static_cast<std::size_t>(k - 1);
    CHECK(t.first_jump[i] >= (k - 1) / 200.0);
    CHECK(t.last_jump[i] <= k / 200.0);
    if (t.interval_counts[i] > 0) CHECK(t.first_jump[i] <= t.last_jump[i]);
  }
}

TEST_CASE("no jumps at zero intensity, limit path at zero noise", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  auto r = regime(100, 0.1, 0.0, 3);
  const auto a = simulate::simulate_path(m, ou_gamma_theta(), r);
  CHECK(a.truth.jump_count() == 0);
  // same Brownian path with and without the jump process
  auto r5 = r;
  r5.lambda = 5.0;
  const auto b = simulate::simulate_path(m, ou_gamma_theta(), r5);
  if (b.truth.jump_count() > 0) {
    const int k = b.truth.jump_interval.front();
    for (int j = 0; j < k - 1; ++j) {
      CHECK(a.observations.values[static_cast<std::size_t>(j)] ==
            b.observations.values[static_cast<std::size_t>(j)]);
    }
  }

  r.epsilon = 0.0;
  r.lambda = 5.0;
  const auto c = simulate::simulate_path(m, ou_gamma_theta(), r);
  double err = 0.0;
  for (int k = 0; k <= 100; ++k) {
    err = std::max(err, std::abs(c.observations.values[static_cast<std::size_t>(k)] - std::exp(-k / 100.0)));
  }
  CHECK(err < 2.0 / (100.0 * 16.0));
}

TEST_CASE("jump counts follow the Poisson law", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  double sum = 0.0;
  const int reps = 10000;
  for (int i = 0; i < reps; ++i) {
    std::vector<double> times, marks;
    simulate::draw_jumps(m, Vector{{1.0, 2.0}}, 5.0, rng::derive_seed(2024, i), times, marks);
    sum += static_cast<double>(times.size());
  }
  CHECK(std::abs(sum / reps - 5.0) < 3.0 * std::sqrt(5.0 / reps));
  // full-path version on a smaller sample
  double s2 = 0.0;
  for (int i = 0; i < 300; ++i) {
    s2 += static_cast<double>(
        simulate::simulate_path(m, ou_gamma_theta(), regime(100, 0.1, 5.0, rng::derive_seed(77, i)))
            .truth.jump_count());
  }
  CHECK(std::abs(s2 / 300 - 5.0) < 3.0 * std::sqrt(5.0 / 300));
}

TEST_CASE("Euler scheme converges with strong order one", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto theta = ou_gamma_theta();
  double s48 = 0.0, s816 = 0.0;
  for (int i = 0; i < 100; ++i) {
    const auto r = regime(50, 0.5, 5.0, rng::derive_seed(5, i));
    simulate::SimulationOptions o;
    o.substeps = 4;
    const double x4 = simulate::simulate_path(m, theta, r, o).observations.values.back();
    o.substeps = 8;
    const double x8 = simulate::simulate_path(m, theta, r, o).observations.values.back();
    o.substeps = 16;
    const double x16 = simulate::simulate_path(m, theta, r, o).observations.values.back();
    s48 += (x4 - x8) * (x4 - x8);
    s816 += (x8 - x16) * (x8 - x16);
  }
  const double ratio = std::sqrt(s48 / s816);
  INFO("RMS ratio " << ratio);
  CHECK(ratio >= 1.3);
  CHECK(ratio <= 2.8);
}

TEST_CASE("distance to the limit path shrinks with eps*lambda", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  const auto theta = ou_gamma_theta();
  const int ns[] = {500, 2000, 8000};
  const double inv_eps[] = {25, 100, 400}, lam[] = {10, 20, 40};
  std::vector<double> l2;
  for (int rung = 0; rung < 3; ++rung) {
    const auto limit = simulate::solve_limit_path(m, theta.mu, ns[rung] + 1);
    double acc = 0.0;
    for (int i = 0; i < 40; ++i) {
      const auto r = regime(ns[rung], 1.0 / inv_eps[rung], lam[rung], rng::derive_seed(8, i));
      const auto obs = simulate::simulate_path(m, theta, r).observations;
      double sup = 0.0;
      for (std::size_t k = 0; k < obs.values.size(); ++k) {
        sup = std::max(sup, std::abs(obs.values[k] - limit.values[k]));
      }
      acc += sup * sup;
    }
    l2.push_back(std::sqrt(acc / 40));
  }
  CHECK(l2[1] < l2[0]);
  CHECK(l2[2] < l2[1]);
}

TEST_CASE("simulation errors", "[simulate]") {
  const auto m = model::make_builtin_model("ou-gamma");
  simulate::SimulationOptions o;
  o.substeps = 3;
  CHECK_THROWS_AS(simulate::simulate_path(m, ou_gamma_theta(), regime(10, 0.1, 1, 1), o), Error);
  auto explode = m;
  explode.drift.value = [](double x, const Vector&) { return 50.0 * x; };
  try {
    simulate::simulate_path(explode, ou_gamma_theta(), regime(10, 0.1, 1, 1));
    FAIL("expected divergence");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SimulationDiverged);
  }
  auto theta = ou_gamma_theta();
  theta.alpha[1] = 0.5;
  CHECK_THROWS_AS(simulate::simulate_path(m, theta, regime(10, 0.1, 1, 1)), Error);
}

TEST_CASE("vanishing jump scale is reported as a warning", "[simulate]") {
  auto m = model::make_builtin_model("ou-gamma-tanhc");
  m.jump_scale.value = [](double x, const Vector&) { return x; };  // crosses zero
  model::ParameterPoint theta{Vector::Constant(1, 1.0), Vector::Constant(1, 1.0),
                              Vector{{1.0, 2.0, 0.0}}};
  auto r = regime(200, 0.5, 2.0, 4);
  auto drift_down = m;
  drift_down.drift.value = [](double, const Vector&) { return -3.0; };
  const auto s = simulate::simulate_path(drift_down, theta, r);
  CHECK_FALSE(s.truth.warnings.empty());
}
