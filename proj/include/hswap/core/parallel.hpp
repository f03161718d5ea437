#pragma once

#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace hswap {

// Static-partition parallel loop. Results indexed by i are deterministic
// regardless of thread count; reductions must be done by the caller in
// index order.
inline void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& fn,
                         unsigned threads = 0) {
  if (n <= 0) return;
  unsigned hw = threads ? threads : std::thread::hardware_concurrency();
  if (hw < 1) hw = 1;
  if (hw == 1 || n == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::int64_t workers = std::min<std::int64_t>(hw, n);
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (std::int64_t w = 0; w < workers; ++w) {
    pool.emplace_back([=, &fn] {
      for (std::int64_t i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace hswap
