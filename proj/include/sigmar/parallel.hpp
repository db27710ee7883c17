#pragma once

#include <cstddef>
#include <functional>

namespace sigmar {

// Process-wide worker count for parallel_for.  The cli sets it once from
// --threads; library code only reads it.  Results never depend on the value:
// workers write to disjoint slots and all reductions run sequentially.
void set_worker_threads(unsigned n);
unsigned worker_threads();

// Runs fn(i) for every i in [0, count) across the configured workers with
// static chunking.  The first exception thrown by any worker is rethrown
// after all of them join.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn);

}  // namespace sigmar
