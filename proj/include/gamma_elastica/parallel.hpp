#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace gamma_elastica {

namespace detail {
inline std::atomic<int>& thread_cap_storage() {
  static std::atomic<int> cap{[] {
    if (const char* env = std::getenv("GAMMA_ELASTICA_THREADS")) {
      const int v = std::atoi(env);
      if (v > 0) return v;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
  }()};
  return cap;
}
}  // namespace detail

/// Upper bound on worker threads used by library-internal parallel loops.
inline int thread_cap() { return detail::thread_cap_storage().load(); }

inline void set_thread_cap(int n) { detail::thread_cap_storage().store(std::max(1, n)); }

/// Runs body(i) for i in [0, n). Results must be written to per-index slots;
/// callers reduce them afterwards in index order, so the outcome does not
/// depend on scheduling. The first exception thrown by any body is rethrown.
template <class Body>
void parallel_for(std::size_t n, Body&& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(thread_cap()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace gamma_elastica
