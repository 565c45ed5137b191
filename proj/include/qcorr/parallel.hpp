/**
 * Copyright 2026 The qcorr Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/**
 * @file parallel.hpp
 * @brief Static-partition parallel loop honoring the QCORR_THREADS cap.
 */

#ifndef QCORR_PARALLEL_HPP_INCLUDED_
#define QCORR_PARALLEL_HPP_INCLUDED_

#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace qcorr {

/// Hardware concurrency, capped by the QCORR_THREADS environment variable.
unsigned default_thread_count();

/// `requested` if nonzero, otherwise default_thread_count().
unsigned resolve_threads(unsigned requested);

/**
 * Run body(worker, begin, end) over contiguous chunks of [0, n).  Chunk
 * boundaries depend only on n and the worker count.  The first exception
 * thrown by any worker is rethrown on the calling thread.
 */
template <typename Body>
void parallel_chunks(std::size_t n, unsigned threads, Body&& body) {
  unsigned workers = resolve_threads(threads);
  if (workers > n) workers = static_cast<unsigned>(n);
  if (workers <= 1) {
    if (n > 0) body(0u, std::size_t{0}, n);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    std::size_t begin = n * w / workers;
    std::size_t end = n * (w + 1) / workers;
    pool.emplace_back([&, w, begin, end] {
      try {
        body(w, begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

/// Number of workers parallel_chunks() will use for n items.
inline unsigned worker_count(std::size_t n, unsigned threads) {
  unsigned workers = resolve_threads(threads);
  if (workers > n) workers = static_cast<unsigned>(n == 0 ? 1 : n);
  return workers == 0 ? 1 : workers;
}

}  // namespace qcorr

#endif  // QCORR_PARALLEL_HPP_INCLUDED_
