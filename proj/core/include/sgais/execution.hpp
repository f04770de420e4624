#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <optional>

namespace sgais {

/// Runs fn(i) for i in [0, count) on up to `threads` worker threads. Work is split
/// into contiguous blocks; with threads <= 1 everything runs inline. The first
/// exception thrown by any task is rethrown after all workers have joined.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

/// Optional wall-clock budget; check() throws TimeoutError once expired.
class Deadline {
 public:
  Deadline() = default;
  static Deadline after(std::chrono::duration<double> budget);
  static Deadline none() { return {}; }

  bool expired() const;
  void check(const char* where) const;

 private:
  std::optional<std::chrono::steady_clock::time_point> at_;
};

/// Seconds on the monotonic clock since construction.
class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

}  // namespace sgais
