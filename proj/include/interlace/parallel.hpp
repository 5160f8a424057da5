#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace interlace {

/// Runs fn(i) for i in [0, n) on `workers` threads. Work is handed out by an
/// atomic counter; fn must write only to its own slot so that results do not
/// depend on scheduling. Exceptions are collected and the first is rethrown.
template <class F>
void parallel_for(long n, int workers, F&& fn) {
  workers = std::max(1, workers);
  if (workers == 1 || n <= 1) {
    for (long i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<long> next{0};
  std::mutex err_mu;
  std::exception_ptr first_error;
  auto body = [&] {
    for (;;) {
      const long i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(err_mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

/// Default worker count: the INTERLACE_WORKERS environment variable when set,
/// otherwise the hardware concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("INTERLACE_WORKERS")) {
    const int v = std::atoi(env);
    if (v >= 1) return v;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? (int)hc : 1;
}

}  // namespace interlace
