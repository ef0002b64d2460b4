#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "jdsn/error.hpp"
#include "jdsn/model/model_spec.hpp"

namespace jdsn::simulate {

/// Solution of dx/dt = a(x, mu0), x(0) = x0 on a uniform grid of [0, 1].
struct DeterministicPath {
  std::vector<double> grid;
  std::vector<double> values;

  std::size_t size() const { return grid.size(); }
};

/// Classical RK4 with `steps` grid points (steps - 1 panels).
inline DeterministicPath solve_limit_path(const model::ModelSpec& model, const Vector& mu0,
                                          int steps) {
  if (steps < 2) fail(ErrorKind::Configuration, "limit path needs at least 2 grid points");
  const auto a = [&](double x) {
    const double v = model.drift(x, mu0);
    if (!std::isfinite(v)) {
      fail(ErrorKind::Model, "drift is not finite at x=" + std::to_string(x));
    }
    return v;
  };
  const auto panels = static_cast<std::size_t>(steps - 1);
  const double h = 1.0 / static_cast<double>(panels);
  DeterministicPath path;
  path.grid.resize(panels + 1);
  path.values.resize(panels + 1);
  double x = model.x0;
  path.grid[0] = 0.0;
  path.values[0] = x;
  for (std::size_t i = 1; i <= panels; ++i) {
    const double k1 = a(x);
    const double k2 = a(x + 0.5 * h * k1);
    const double k3 = a(x + 0.5 * h * k2);
    const double k4 = a(x + h * k3);
    x += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    path.grid[i] = static_cast<double>(i) / static_cast<double>(panels);
    path.values[i] = x;
  }
  return path;
}

}  // namespace jdsn::simulate
