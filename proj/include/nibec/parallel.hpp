#pragma once
// Minimal thread pool-free parallel loop.  Results must be written to
// disjoint slots (or reduced over fixed-size chunks in index order) so that
// output is independent of the worker count.  NIBEC_THREADS caps the number
// of workers; unset means hardware concurrency.

#include <cstddef>
#include <functional>

namespace nibec {

int worker_count();

// Calls fn(begin, end) over a fixed partition of [0, n) into chunks of
// `chunk` items.  Chunk boundaries do not depend on the worker count.
void parallel_chunks(std::size_t n, std::size_t chunk,
                     const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace nibec
