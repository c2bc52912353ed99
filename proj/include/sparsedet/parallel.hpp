// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace sparsedet {

/// Number of workers to use for a request of `requested` (0 = all cores).
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls body(worker, begin, end) over fixed-size chunks of [0, count). Chunk
/// boundaries do not depend on the worker count; the first exception thrown
/// by any worker is rethrown on the caller's thread.
template <class Body>
void parallel_chunks(std::int64_t count, int workers, Body&& body, std::int64_t chunk = 1024) {
  if (count <= 0) return;
  const int n_workers =
      static_cast<int>(std::min<std::int64_t>(resolve_workers(workers), (count + chunk - 1) / chunk));
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto run = [&](int worker) {
    try {
      for (;;) {
        const std::int64_t begin = next.fetch_add(chunk);
        if (begin >= count) break;
        body(worker, begin, std::min(count, begin + chunk));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next.store(count);
    }
  };

  if (n_workers <= 1) {
    run(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(run, w);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace sparsedet
