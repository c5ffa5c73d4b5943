#pragma once

#include <cstddef>
#include <functional>

namespace kb {

// Worker count from KB_THREADS (default 1). Results must never depend on it:
// parallel_for partitions work into fixed-size chunks and any reduction is
// performed chunk-by-chunk in index order regardless of which worker ran what.
int worker_count();

// Runs fn(begin, end) over [0, n) split into deterministic chunks. fn must
// write only to disjoint per-index or per-chunk storage.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn);

}  // namespace kb
