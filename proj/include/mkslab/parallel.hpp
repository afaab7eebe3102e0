#pragma once

#include <cstddef>
#include <functional>

namespace mkslab {

/// Worker count: MKSLAB_THREADS if set (>= 1), else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n) across thread_count() workers. Exceptions
/// from workers are rethrown on the calling thread (first one wins).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace mkslab
