#pragma once

#include <atomic>
#include <cstddef>
#include <thread>
#include <vector>

namespace relaynet {

/// Runs fn(i) for i in [0, count) on up to `jobs` threads. Work items are
/// independent; callers write results into pre-sized slots so output is
/// identical regardless of scheduling. jobs <= 1 runs inline.
template <typename Fn>
void parallel_for(int jobs, size_t count, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  size_t workers = std::min<size_t>(size_t(jobs), count);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (size_t t = 0; t < workers; ++t) {
    threads.emplace_back([&] {
      while (true) {
        size_t i = next.fetch_add(1);
        if (i >= count) break;
        fn(i);
      }
    });
  }
  for (auto& th : threads) th.join();
}

}  // namespace relaynet
