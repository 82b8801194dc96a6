#pragma once

#include <cstddef>
#include <functional>

namespace gibbslab {

// Worker count: GIBBSLAB_THREADS if set and positive, else hardware concurrency.
int worker_count();

// Calls fn(i) for i in [0, n). Each index runs exactly once; callers write results by index,
// so output never depends on the schedule. The first exception thrown is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace gibbslab
