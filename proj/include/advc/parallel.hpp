#pragma once

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace advc {

/// Worker count: ADVC_THREADS if set and positive, else hardware concurrency.
int worker_count();

namespace detail {
// Set on pool threads so nested loops run inline instead of spawning more.
inline thread_local bool in_worker = false;
}  // namespace detail

/// Runs fn(i) for i in [begin, end) on up to worker_count() threads. Each
/// index is visited exactly once; the first exception thrown is rethrown.
/// Calls made from inside another parallel_for run serially.
template <class Fn>
void parallel_for(int begin, int end, Fn&& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = detail::in_worker ? 1 : std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([&, lo, hi] {
      detail::in_worker = true;
      try {
        for (int i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace advc
