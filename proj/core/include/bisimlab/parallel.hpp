#pragma once

#include <cstddef>
#include <functional>

namespace bisimlab {

/**
 * Run body(i) for i in [0, n) on up to `workers` threads, contiguous chunks.
 * Results must be written to disjoint slots; under that discipline the
 * output is identical for any worker count. workers <= 1 runs inline. The
 * first exception thrown by any chunk is rethrown on the calling thread.
 */
void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& body);

}  // namespace bisimlab
