#pragma once

#include <cstddef>
#include <functional>

namespace cgua {

/// Sets the worker count used by parallel_for. 0 means hardware concurrency.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Runs fn(begin, end) over contiguous, disjoint chunks of [0, n).
/// Callers must only write to per-index outputs; the chunking is static so
/// results never depend on the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace cgua
