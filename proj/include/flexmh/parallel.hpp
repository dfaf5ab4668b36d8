#pragma once

#include <cstddef>
#include <functional>

namespace flexmh {

// Worker count: FLEXMH_THREADS caps the hardware concurrency; values below 1
// mean sequential execution.
std::size_t worker_count();

// Runs fn(chunk_index, begin, end) over a fixed partition of [0, total) into
// chunk_count pieces. The partition does not depend on the worker count, so
// per-chunk results can be reduced in chunk order to make the outcome
// independent of the parallelism degree.
void parallel_chunks(std::size_t total, std::size_t chunk_count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace flexmh
