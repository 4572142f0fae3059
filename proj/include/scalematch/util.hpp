#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <string>

namespace scalematch {

/// Writes `content` to `path` via a temp file in the same directory plus rename.
void atomic_write_text(const std::string& path, const std::string& content);

std::string read_text(const std::string& path);

/// round-half-up, used for pixel dimensions
inline long long round_half_up(double v) {
  return static_cast<long long>(std::floor(v + 0.5));
}

/// Runs fn(i) for i in [0, n) on up to `workers` threads (0 = hardware
/// concurrency). Rethrows the first exception after all threads join.
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn);

}  // namespace scalematch
