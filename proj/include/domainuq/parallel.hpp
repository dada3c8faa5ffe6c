#pragma once

// Thread fan-out for independent per-sample work. Results are written into
// per-index slots and reduced afterwards in index order, so the outcome does
// not depend on the number of threads.

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "domainuq/error.hpp"
#include "domainuq/numerics.hpp"

namespace domainuq {

inline constexpr const char* kThreadsEnvVar = "DOMAINUQ_THREADS";

/// requested > 0 wins; otherwise DOMAINUQ_THREADS; otherwise 1.
inline unsigned resolve_threads(unsigned requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv(kThreadsEnvVar)) {
    try {
      const long v = std::stol(env);
      if (v > 0) return static_cast<unsigned>(v);
    } catch (const std::exception&) {
    }
    throw Error(ErrorKind::InvalidArgument, std::string(kThreadsEnvVar) + " must be a positive integer");
  }
  return 1;
}

/// Calls fn(i) for i in [0, count) on up to `threads` threads. If several
/// calls throw, the exception from the smallest index is rethrown.
inline void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn) {
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
}

inline constexpr std::size_t kReductionBlock = 512;

/// Mean over i in [0, count) of the vectors fn(i) (all of length `width`),
/// accumulated in index order with compensation.
inline std::vector<double> ordered_mean(std::size_t count, std::size_t width, unsigned threads,
                                        const std::function<std::vector<double>(std::size_t)>& fn) {
  CompensatedVectorSum acc(width);
  std::vector<std::vector<double>> slots(std::min(count, kReductionBlock));
  for (std::size_t start = 0; start < count; start += kReductionBlock) {
    const std::size_t len = std::min(kReductionBlock, count - start);
    parallel_for(len, threads, [&](std::size_t k) { slots[k] = fn(start + k); });
    for (std::size_t k = 0; k < len; ++k) {
      if (slots[k].size() != width) throw Error(ErrorKind::MeshMismatch, "sample result has the wrong width");
      acc.add(slots[k]);
    }
  }
  if (count == 0) return std::vector<double>(width, 0.0);
  return acc.values(1.0 / static_cast<double>(count));
}

}  // namespace domainuq
