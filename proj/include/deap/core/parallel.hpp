#pragma once

#include <cstddef>
#include <functional>

namespace deap {

/// Worker cap shared by every parallel loop. Defaults to DEAP_THREADS when set,
/// else hardware concurrency.
int thread_count();
void set_thread_count(int n);

/// Runs fn(i) for i in [0, n) over contiguous static chunks. Each index must
/// write only its own outputs; results are then independent of thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace deap
