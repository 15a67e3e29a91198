#pragma once

#include <cstddef>
#include <functional>

namespace lotkit {

/// Number of worker threads: hardware concurrency, capped by LOTKIT_THREADS.
unsigned worker_count();

/// Runs body(i) for i in [0, count). Each index runs exactly once; callers
/// write results into per-index slots so output is independent of scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace lotkit
