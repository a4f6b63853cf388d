#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace csmix {

// Runs fn(0..n-1), chunked over up to `threads` std::threads. Work must be
// independent across indices; results must not depend on execution order.
inline void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  const int nt = std::min(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += nt) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace csmix
