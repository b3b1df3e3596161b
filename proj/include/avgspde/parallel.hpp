#pragma once

#include <cstddef>
#include <functional>

namespace avgspde {

/// Worker count from AVG_SPDE_THREADS (0 or unset = hardware concurrency).
std::size_t worker_count();

/// Runs body(i) for i in [0, n) on up to worker_count() threads. Callers
/// write results into slot i, so the outcome does not depend on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace avgspde
