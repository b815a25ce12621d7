#pragma once

#include <cstddef>
#include <functional>

namespace apcauchy {

/// Number of worker threads used by parallel_for.
///
/// Defaults to the hardware concurrency, capped by the APCAUCHY_THREADS
/// environment variable when it is set to a positive integer.
std::size_t thread_budget();

/// Runs fn(i) for i in [0, n).  Work is split into deterministic contiguous
/// chunks, so per-index results never depend on the thread count.  Callers
/// must only write to index-owned state (or reduce with order-independent
/// operations such as max).
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& chunk_fn);

}  // namespace apcauchy
