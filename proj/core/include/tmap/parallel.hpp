#pragma once

#include <cstddef>
#include <functional>

namespace tmap {

/// Number of worker threads to use when the caller passes 0: the TMAP_THREADS
/// environment variable if set, otherwise the hardware concurrency.
int default_thread_count();

/// Calls body(i) for i in [0, n) using up to `threads` threads (0 = default).
/// Work is split into contiguous blocks; the first exception is rethrown.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

}  // namespace tmap
