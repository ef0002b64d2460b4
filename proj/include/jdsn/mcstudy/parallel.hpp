#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace jdsn::mcstudy {

/// Runs body(i) for i in [0, count) on `workers` threads. Worker w takes the
/// indices congruent to w modulo the worker count; results must be written
/// to per-index slots so the outcome does not depend on scheduling.
inline void parallel_for(std::size_t count, int workers,
                         const std::function<void(std::size_t)>& body) {
  const auto w = static_cast<std::size_t>(workers < 1 ? 1 : workers);
  if (w == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::exception_ptr> errors(w);
  std::vector<std::thread> pool;
  pool.reserve(w);
  for (std::size_t t = 0; t < w; ++t) {
    pool.emplace_back([&, t] {
      try {
        for (std::size_t i = t; i < count; i += w) body(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace jdsn::mcstudy
