#pragma once

#include <cstddef>
#include <functional>

namespace dispersim {

/// Worker count used when a caller passes 0.
std::size_t default_thread_count();

/// Runs body(i) for i in [0, count) on up to `threads` workers (0 = all cores).
/// Callers write results into per-index slots, so the outcome does not depend
/// on scheduling. If any call throws, the exception from the smallest failing
/// index is rethrown after all workers stop.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace dispersim
