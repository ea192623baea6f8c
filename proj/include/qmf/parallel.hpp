#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace qmf {

// Worker count: QMF_THREADS env var if set, else hardware concurrency.
unsigned default_thread_count();

// Runs work(0..n_blocks-1) across n_threads workers.  Blocks are claimed
// through an atomic counter; callers that need reproducible reductions must
// keep per-block state and merge it in block order afterwards.
void parallel_blocks(std::size_t n_blocks, unsigned n_threads,
                     const std::function<void(std::size_t)>& work);

}  // namespace qmf
