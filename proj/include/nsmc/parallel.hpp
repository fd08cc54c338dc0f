#pragma once

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace nsmc {

/// Run fn(i) for i in [0, n) on up to `threads` workers over contiguous
/// index blocks. Work items must be independent; because each item owns
/// its output slot and its substream, the result is identical to the
/// sequential run.
inline void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(threads, n);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = n * w / workers;
    const std::size_t hi = n * (w + 1) / workers;
    pool.emplace_back([lo, hi, &fn] {
      for (std::size_t i = lo; i < hi; ++i) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace nsmc
