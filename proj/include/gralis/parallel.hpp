#pragma once

#include <cstddef>
#include <functional>

namespace gralis {

// Runs body(item) for item in [0, count) on up to `workers` threads.
// Items are claimed dynamically; callers must write results into per-item
// slots and reduce them afterwards in index order to stay deterministic.
// The first exception thrown by any item is rethrown on the calling thread.
void parallel_for(std::size_t count, unsigned workers,
                  const std::function<void(std::size_t)>& body);

}  // namespace gralis
