#pragma once

#include <cstddef>
#include <functional>

namespace ccws {

/// Caps the worker count used by every parallel loop in the library.
/// 0 selects std::thread::hardware_concurrency().
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Splits [0, n) into at most thread_count() contiguous chunks and runs
/// `body(chunk_index, begin, end)` on each, one thread per chunk. Chunk
/// boundaries depend only on n and the thread count; results written to
/// disjoint index ranges are therefore independent of scheduling.
/// The first exception thrown by any chunk is rethrown to the caller.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t chunk, std::size_t begin,
                                           std::size_t end)>& body,
                  std::size_t min_chunk = 256);

/// Number of chunks parallel_for(n, ..., min_chunk) will use.
std::size_t chunk_count(std::size_t n, std::size_t min_chunk = 256);

}  // namespace ccws
