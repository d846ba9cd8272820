#pragma once

#include <cstdint>
#include <functional>

namespace gcrp {

// Number of worker threads in use. Defaults to GCRP_THREADS if set,
// otherwise hardware_concurrency.
int thread_count();

// Resize the pool. n < 1 is clamped to 1.
void set_thread_count(int n);

// Runs fn over disjoint contiguous ranges covering [0, n). The split is a
// pure function of n and the thread count, so any run with the same settings
// touches identical ranges; each index is processed exactly once. Callers
// must write only outputs owned by their index range, which keeps results
// bitwise reproducible for any thread count. Runs inline when the pool has a
// single thread or n == 1.
void parallel_for(int64_t n, const std::function<void(int64_t, int64_t)>& fn);

}  // namespace gcrp
