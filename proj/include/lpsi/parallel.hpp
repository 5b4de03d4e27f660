#pragma once

#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace lpsi {

/// Worker cap: LPSI_THREADS if set, else hardware concurrency. Read on every
/// call so tests can flip the env var between runs.
inline std::size_t thread_budget() {
  if (const char* env = std::getenv("LPSI_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) return static_cast<std::size_t>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : hc;
}

/// body(i) for i in [0, n), statically partitioned. body must only touch
/// per-index state; any reduction happens after the join, so results do not
/// depend on the number of workers.
template <class F>
void parallel_for(std::size_t n, F&& body) {
  const std::size_t workers = std::min(thread_budget(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t t = 0; t < workers; ++t) {
    pool.emplace_back([&, t] {
      const std::size_t lo = n * t / workers;
      const std::size_t hi = n * (t + 1) / workers;
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& th : pool) th.join();
}

template <class T, class F>
std::vector<T> parallel_map(std::size_t n, F&& fn) {
  std::vector<T> out(n);
  parallel_for(n, [&](std::size_t i) { out[i] = fn(i); });
  return out;
}

}  // namespace lpsi
