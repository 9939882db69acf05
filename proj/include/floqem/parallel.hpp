#pragma once

#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace floqem {

// Static-chunk parallel map over [0, count). Callers preallocate output slots
// indexed by i, so results are identical for every thread count.
inline void parallel_for(int count, int threads,
                         const std::function<void(int)>& fn) {
  if (count <= 0) return;
  threads = std::max(1, std::min({threads, count,
                                  static_cast<int>(std::thread::hardware_concurrency() > 0
                                                       ? std::thread::hardware_concurrency()
                                                       : 1u) * 4}));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }

  std::mutex mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (int t = 0; t < threads; ++t) {
    const int lo = static_cast<int>(static_cast<long>(count) * t / threads);
    const int hi = static_cast<int>(static_cast<long>(count) * (t + 1) / threads);
    pool.emplace_back([&, lo, hi] {
      try {
        for (int i = lo; i < hi; ++i) {
          {
            std::lock_guard<std::mutex> lk(mu);
            if (first_error) return;
          }
          fn(i);
        }
      } catch (...) {
        std::lock_guard<std::mutex> lk(mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace floqem
