#pragma once

#include <functional>

namespace msbm {

/// Worker count: `requested` if positive, else hardware concurrency; a
/// positive MSBM_THREADS caps the result.
int resolve_threads(int requested = 0);

/// Runs job(0) .. job(count - 1) on up to `threads` workers. Jobs must not
/// share mutable state. The first exception thrown by a job is rethrown.
void parallel_for(int count, int threads, const std::function<void(int)>& job);

}  // namespace msbm
