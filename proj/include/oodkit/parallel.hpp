#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace oodkit::detail {

/// Runs fn(begin, end) over contiguous chunks of [0, n). Callers only use it
/// for work whose per-index result does not depend on the chunking, so the
/// output is identical for every thread count.
template <class Fn>
void parallel_chunks(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t begin = 0; begin < n; begin += chunk) {
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&fn, begin, end] { fn(begin, end); });
  }
}

}  // namespace oodkit::detail
