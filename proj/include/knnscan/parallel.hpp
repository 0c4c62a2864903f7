#pragma once

#include <functional>

namespace knnscan {

/// KNNSCAN_THREADS env var if set, else hardware concurrency (min 1).
int defaultThreads();

/// Runs fn(0..n-1) on up to `threads` workers. Tasks must write to disjoint
/// state; reductions stay deterministic when combined by task index afterwards.
void parallelFor(long n, int threads, const std::function<void(long)>& fn);

}  // namespace knnscan
