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

namespace nngs::parallel {

namespace detail {
inline std::atomic<std::size_t>& thread_cap() {
  static std::atomic<std::size_t> cap{0};
  return cap;
}
}  // namespace detail

/// Caps the worker count used by for_each. 0 means "hardware concurrency".
inline void set_max_threads(std::size_t n) { detail::thread_cap() = n; }

inline std::size_t max_threads() {
  std::size_t cap = detail::thread_cap();
  if (cap == 0) {
    if (const char* env = std::getenv("NNGS_THREADS")) {
      try {
        cap = static_cast<std::size_t>(std::stoul(env));
      } catch (const std::exception&) {
        cap = 0;
      }
    }
  }
  if (cap == 0) cap = std::max(1u, std::thread::hardware_concurrency());
  return cap;
}

/// Runs body(i) for i in [0, count). Each index is processed exactly once;
/// callers write to index-owned slots so results do not depend on scheduling.
/// The first exception thrown by any worker is rethrown on the caller.
template <typename Body>
void for_each(std::size_t count, Body&& body) {
  const std::size_t workers = std::min(max_threads(), count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = count;
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (std::size_t t = 1; t < workers; ++t) pool.emplace_back(run);
  run();
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace nngs::parallel
