#pragma once

#include "ldp/types.hpp"

#include <atomic>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace ldp {

/// 0 means "use hardware concurrency"; anything else is clamped to [1, n].
inline int resolve_threads(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs body(i) for i in [0, n). Tasks are claimed through an atomic counter,
/// so callers must write results into per-index slots and reduce afterwards in
/// index order; that keeps every reduction bit-identical across schedules.
/// The first exception thrown by any task is rethrown on the calling thread.
inline void parallel_for(Index n, int threads,
                         const std::function<void(Index)>& body) {
  const int nt = std::min<Index>(resolve_threads(threads), n > 0 ? n : 1);
  if (n <= 0) return;
  if (nt <= 1) {
    for (Index i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<Index> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const Index i = next.fetch_add(1);
      if (i >= n || failed.load(std::memory_order_relaxed)) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        failed.store(true, std::memory_order_relaxed);
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace ldp
