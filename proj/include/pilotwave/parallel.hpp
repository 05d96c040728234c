// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace pilotwave {

/**
 * Run fn(i) for every i in [0, n) on `workers` threads.
 *
 * Work is handed out in fixed-size chunks from a shared counter, so idle
 * threads pick up the remaining chunks. Callers write results into slot i of
 * a preallocated vector; the output therefore does not depend on scheduling.
 * If any call throws, the exception from the lowest-numbered failing chunk is
 * rethrown after all threads have joined.
 */
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
  if (n == 0) return;
  workers = std::max(1u, workers);
  const std::size_t chunk = std::max<std::size_t>(1, n / (8 * std::size_t{workers}));
  const std::size_t chunks = (n + chunk - 1) / chunk;
  if (workers == 1 || chunks == 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::exception_ptr> errors(chunks);
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) return;
      try {
        const std::size_t end = std::min(n, (c + 1) * chunk);
        for (std::size_t i = c * chunk; i < end; ++i) fn(i);
      } catch (...) {
        errors[c] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const unsigned spawn = static_cast<unsigned>(std::min<std::size_t>(workers, chunks)) - 1;
  pool.reserve(spawn);
  for (unsigned w = 0; w < spawn; ++w) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace pilotwave
