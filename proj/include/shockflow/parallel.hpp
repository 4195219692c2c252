#pragma once

#include <cstddef>
#include <functional>

namespace shockflow {

/// Worker count: SHOCKFLOW_THREADS if set and positive, else hardware concurrency.
int worker_count();

/// Runs fn(0..n-1) over worker_count() threads. The first exception thrown by
/// any task is rethrown on the calling thread after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace shockflow
