#pragma once

// Replica-level fork-join helpers.
//
// Work is split by index; every index writes only its own output slot, and
// reductions run afterwards in index order, so results do not depend on the
// worker count.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <exception>
#include <mutex>
#include <span>
#include <thread>
#include <vector>

namespace cw {

/// Calls fn(i) for i in [0, count) on up to `workers` threads (0 = hardware).
template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, std::max<std::size_t>(count, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < count; i += workers) fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Pairwise (cascade) summation; the result depends only on the input order.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

/// Mean and standard error of the mean, using pairwise sums.
struct MeanEstimate {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanEstimate mean_and_stderr(std::span<const double> xs) {
  MeanEstimate out;
  const auto n = xs.size();
  if (n == 0) return out;
  out.mean = pairwise_sum(xs) / static_cast<double>(n);
  if (n < 2) return out;
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (xs[i] - out.mean) * (xs[i] - out.mean);
  const double var = pairwise_sum(dev) / static_cast<double>(n - 1);
  out.se = std::sqrt(var / static_cast<double>(n));
  return out;
}

}  // namespace cw
