#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace vstates {

/// Worker count: VSTATE_THREADS if set to a positive integer, else the hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("VSTATE_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n > 0) return n;
    } catch (...) {
    }
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace detail {
inline thread_local bool inside_parallel = false;
}

/// Runs f(i) for i in [0, n) over contiguous static chunks. Nested calls run serially.
/// Each index is handled by exactly one worker, so results written per index do not
/// depend on the thread count.
template <class F>
void parallel_for(int n, F&& f, int min_chunk = 1) {
  const int workers = std::min(thread_count(), std::max(1, n / std::max(1, min_chunk)));
  if (workers <= 1 || detail::inside_parallel) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex guard;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = int(std::int64_t(n) * w / workers);
    const int hi = int(std::int64_t(n) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      detail::inside_parallel = true;
      try {
        for (int i = lo; i < hi; ++i) f(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(guard);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace vstates
