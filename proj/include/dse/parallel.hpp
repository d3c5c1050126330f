#pragma once

#include <cstddef>
#include <functional>

namespace dse {

/// Worker count from DSE_THREADS (0 or unset = hardware concurrency).
std::size_t thread_count();

/// Overrides DSE_THREADS for the current process; 0 restores the default.
void set_thread_count(std::size_t n);

/// Runs body(i) for i in [0, n) across up to thread_count() workers. Each
/// index runs exactly once; results must be written to per-index slots.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dse
