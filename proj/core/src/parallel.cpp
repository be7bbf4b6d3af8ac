#include "ccws/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace ccws {
namespace {

std::atomic<unsigned> g_threads{0};

unsigned resolved_threads() {
  const unsigned requested = g_threads.load(std::memory_order_relaxed);
  if (requested != 0) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

}  // namespace

void set_thread_count(unsigned threads) { g_threads.store(threads, std::memory_order_relaxed); }

unsigned thread_count() { return resolved_threads(); }

std::size_t chunk_count(std::size_t n, std::size_t min_chunk) {
  if (n == 0) return 0;
  min_chunk = std::max<std::size_t>(1, min_chunk);
  const std::size_t by_size = (n + min_chunk - 1) / min_chunk;
  return std::max<std::size_t>(1, std::min<std::size_t>(resolved_threads(), by_size));
}

void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t, std::size_t)>& body,
                  std::size_t min_chunk) {
  const std::size_t chunks = chunk_count(n, min_chunk);
  if (chunks == 0) return;
  if (chunks == 1) {
    body(0, 0, n);
    return;
  }

  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto run = [&](std::size_t c) {
    const std::size_t begin = n * c / chunks;
    const std::size_t end = n * (c + 1) / chunks;
    try {
      body(c, begin, end);
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
    }
  };

  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks - 1);
    for (std::size_t c = 1; c < chunks; ++c) workers.emplace_back(run, c);
    run(0);
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace ccws
