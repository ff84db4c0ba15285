#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace tlrmt {

/// Runs fn(i) for i in [0, n) on up to n_threads workers. Results must be
/// written to pre-sized, index-owned slots so the outcome is independent of
/// scheduling. n_threads == 0 means hardware concurrency.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                         unsigned n_threads = 0) {
  if (n == 0) return;
  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = static_cast<unsigned>(std::min<std::size_t>(n_threads, n));
  if (n_threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  std::size_t base = n / n_threads, extra = n % n_threads, start = 0;
  for (unsigned w = 0; w < n_threads; ++w) {
    const std::size_t count = base + (w < extra ? 1 : 0);
    pool.emplace_back([&, start, count] {
      try {
        for (std::size_t i = start; i < start + count; ++i) fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
    start += count;
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace tlrmt
