#pragma once

#include <cstddef>
#include <functional>

namespace gasolve {

/// Runs fn(i) for i in [0, n) on a fixed pool of worker threads. Each index
/// must write only its own output slot; callers reduce in index order so
/// results do not depend on the thread count. GASOLVE_THREADS overrides the
/// worker count (1 disables threading).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

std::size_t worker_count();

/// Overrides the worker count for this process; 0 restores the default.
void set_worker_count(std::size_t n);

}  // namespace gasolve
