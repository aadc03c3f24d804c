#pragma once

#include <cstddef>
#include <functional>

namespace imb {

// Worker count: hardware concurrency, capped by IMB_DPGM_THREADS when set (minimum 1).
std::size_t thread_budget();

// Runs fn(i) for i in [0, n) split into contiguous chunks across up to thread_budget()
// threads. Each index is handled by exactly one call, so callers that write only to
// slot i get results independent of the thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace imb
