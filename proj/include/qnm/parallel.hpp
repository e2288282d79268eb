#pragma once

#include <algorithm>
#include <cstddef>
#include <future>
#include <vector>

namespace qnm {

// Number of worker threads (environment QNM_WORKERS, default hardware concurrency).
unsigned worker_count();

// Runs f(i) for i < n on worker threads; results in index order.
template <typename F>
auto parallel_map(std::size_t n, F&& f) {
  using R = decltype(f(std::size_t{0}));
  std::vector<R> out;
  out.reserve(n);
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(worker_count(), n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out.push_back(f(i));
    return out;
  }
  std::vector<std::future<R>> pending;
  std::size_t next = 0;
  while (next < n || !pending.empty()) {
    while (next < n && pending.size() < workers) {
      pending.push_back(std::async(std::launch::async, f, next));
      ++next;
    }
    out.push_back(pending.front().get());
    pending.erase(pending.begin());
  }
  return out;
}

}  // namespace qnm
