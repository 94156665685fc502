#pragma once

// Deterministic replica-parallel loop. Workers claim fixed-size blocks from
// a shared counter and call fn(worker, r) for every replica index r in
// [0, total). Callers keep determinism by writing results into per-replica
// slots or by merging integer counts, never by relying on call order.

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <thread>
#include <vector>

namespace fflab {

template <class Fn>
void parallel_replicas(std::uint64_t total, int threads, Fn&& fn) {
  if (threads <= 1 || total < 2048) {
    for (std::uint64_t r = 0; r < total; ++r) fn(0, r);
    return;
  }
  const int nt = std::min(threads, 64);
  std::atomic<std::uint64_t> next{0};
  constexpr std::uint64_t kBlock = 256;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(nt));
  for (int w = 0; w < nt; ++w) {
    pool.emplace_back([&, w] {
      for (;;) {
        const std::uint64_t lo = next.fetch_add(kBlock);
        if (lo >= total) break;
        const std::uint64_t hi = std::min(total, lo + kBlock);
        for (std::uint64_t r = lo; r < hi; ++r) fn(w, r);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace fflab
