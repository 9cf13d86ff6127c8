#pragma once

#include <cstddef>
#include <functional>

namespace curvflow {

/// Worker count: CURVFLOW_THREADS if set and positive, else hardware concurrency.
int thread_count();

/// Runs body(i) for i in [begin, end) over a static partition. Each index must
/// write only its own outputs; no reductions happen here, so results do not
/// depend on the thread count.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace curvflow
