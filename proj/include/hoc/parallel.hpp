#pragma once

#include <cstddef>
#include <functional>

namespace hoc {

/// Worker count: hardware concurrency, capped by the HOC_THREADS environment
/// variable when it is set to a positive integer.
std::size_t worker_count();

/// Calls body(i) for every i in [0, count). Work items are claimed dynamically,
/// so body must only write to state owned by item i. Exceptions thrown by any
/// item are rethrown on the calling thread (first one wins). Nested calls run
/// serially on the calling worker.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

/// Rows per sampling block. Block b of any sampled quantity always draws from
/// substream b, so results do not depend on the worker count.
inline constexpr std::size_t kBlockRows = 8192;

inline std::size_t block_count(std::size_t rows) {
  return (rows + kBlockRows - 1) / kBlockRows;
}

}  // namespace hoc
