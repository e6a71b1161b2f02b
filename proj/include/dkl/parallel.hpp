#pragma once

#include <functional>

namespace dkl {

/// Runs fn(0..count-1) across at most num_threads workers with a static
/// block partition. Each index must touch disjoint state; results are
/// identical to the serial loop regardless of the worker count. The first
/// exception thrown by any worker is rethrown after all workers join.
void parallel_for(int num_threads, int count, const std::function<void(int)>& fn);

}  // namespace dkl
