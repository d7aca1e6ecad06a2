#pragma once

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace snls {

namespace detail {
inline std::atomic<int>& default_thread_count() {
  static std::atomic<int> n{0};  // 0 = resolve lazily
  return n;
}
}  // namespace detail

inline void set_default_threads(int n) { detail::default_thread_count() = n; }

inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  int configured = detail::default_thread_count().load();
  if (configured > 0) return configured;
  if (const char* env = std::getenv("SNLS_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Run fn(i) for i in [0, n). Work is split into static contiguous blocks so
// the assignment of items to threads is deterministic; numeric output must
// not depend on it anyway, since each item writes only to its own slot.
// The first exception thrown by any item is rethrown on the caller.
template <class F>
inline void parallel_for(std::size_t n, F&& fn, int n_threads = 0) {
  if (n == 0) return;
  const int threads =
      static_cast<int>(std::min<std::size_t>(resolve_threads(n_threads), n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t block = (n + threads - 1) / threads;
  for (int t = 0; t < threads; ++t) {
    const std::size_t lo = t * block;
    const std::size_t hi = std::min(n, lo + block);
    if (lo >= hi) break;
    pool.emplace_back([&, lo, hi]() {
      try {
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

// Pairwise summation over an ordered range: deterministic (independent of
// thread count, which never touches reductions) and more accurate than a
// running sum.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 8) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double d = xs[i] - m;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

}  // namespace snls
