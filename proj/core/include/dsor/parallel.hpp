// Copyright 2026 The DSOR Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef DSOR_PARALLEL_HPP_
#define DSOR_PARALLEL_HPP_

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace dsor {

/// Number of worker threads to use for a request of `threads`; 0 means all
/// hardware threads.
[[nodiscard]] inline unsigned resolve_threads(unsigned threads) noexcept {
  if (threads == 0) {
    threads = std::max(1U, std::thread::hardware_concurrency());
  }
  return threads;
}

/// Calls fn(i) for every i in [0, n), splitting the range into contiguous
/// chunks over `threads` workers. fn must only write to per-index state, so
/// results do not depend on the thread count. The first exception thrown by
/// any worker is rethrown on the caller.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(resolve_threads(threads), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) {
      fn(i);
    }
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(n, begin + chunk);
      if (begin >= end) {
        break;
      }
      pool.emplace_back([&, begin, end] {
        try {
          for (std::size_t i = begin; i < end; ++i) {
            fn(i);
          }
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) {
            error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) {
    std::rethrow_exception(error);
  }
}

}  // namespace dsor

#endif  // DSOR_PARALLEL_HPP_
