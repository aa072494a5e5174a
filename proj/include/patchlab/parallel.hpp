#pragma once

#include <cstddef>
#include <functional>
#include <span>

namespace patchlab {

/// Worker count: the hardware concurrency (at least 1), capped by
/// PATCHLAB_THREADS when that is set and positive.
std::size_t worker_count();

/// Override the worker count for this process (0 restores the default).
void set_worker_count(std::size_t n);

/// Runs body(begin, end) over contiguous chunks of [0, n). Each index is
/// owned by exactly one chunk, so per-index results do not depend on the
/// thread count.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body);

/// Pairwise (cascade) summation with a fixed reduction tree.
double pairwise_sum(std::span<const double> values);

}  // namespace patchlab
