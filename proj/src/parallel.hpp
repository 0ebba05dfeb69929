#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace tailcomb::detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(begin, end, worker) over [0, n) in fixed-size chunks pulled from a
// shared counter. Callers must make their reductions order-independent
// (integer sums, or per-index output slots).
template <class Fn>
void parallel_chunks(std::size_t n, unsigned workers, std::size_t chunk, Fn&& fn) {
  workers = resolve_workers(workers);
  chunk = std::max<std::size_t>(chunk, 1);
  if (workers == 1 || n <= chunk) {
    for (std::size_t begin = 0; begin < n; begin += chunk) {
      fn(begin, std::min(n, begin + chunk), 0u);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        while (true) {
          const std::size_t begin = next.fetch_add(chunk);
          if (begin >= n) break;
          fn(begin, std::min(n, begin + chunk), w);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace tailcomb::detail
