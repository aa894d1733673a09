#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace qbe {

/// Process-wide worker count for pointwise field kernels. Each grid point is
/// written by exactly one worker, so results do not depend on the count;
/// diagnostics reductions stay serial.
inline int& worker_threads() {
  static int n = 1;
  return n;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
  int nt = worker_threads();
  if (nt <= 1 || count < 256) {
    fn(std::size_t{0}, count);
    return;
  }
  std::vector<std::thread> pool;
  std::size_t chunk = (count + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    std::size_t lo = t * chunk;
    std::size_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace qbe
