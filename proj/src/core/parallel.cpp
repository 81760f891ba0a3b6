#include "ocs/core/parallel.hpp"

#include <atomic>
#include <thread>
#include <vector>

namespace ocs {

namespace {
int g_threads = 0;
// Workers run nested parallel_chunks serially: chunk boundaries are fixed, so
// results are identical either way, without thread oversubscription.
thread_local bool g_in_worker = false;
}

void set_thread_count(int n) { g_threads = n < 0 ? 0 : n; }

int thread_count() {
  if (g_threads > 0) return g_threads;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::size_t num_chunks(std::size_t n, std::size_t chunk_size) {
  if (chunk_size == 0) chunk_size = 1;
  return (n + chunk_size - 1) / chunk_size;
}

void parallel_chunks_indexed(
    std::size_t n, std::size_t chunk_size,
    const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  if (chunk_size == 0) chunk_size = 1;
  const std::size_t chunks = num_chunks(n, chunk_size);
  const int workers =
      g_in_worker ? 1
                  : std::min<std::size_t>(static_cast<std::size_t>(thread_count()), chunks);

  if (workers <= 1) {
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  auto work = [&]() {
    const bool was = g_in_worker;
    g_in_worker = true;
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= chunks) break;
      const std::size_t b = c * chunk_size;
      fn(c, b, std::min(n, b + chunk_size));
    }
    g_in_worker = was;
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int i = 1; i < workers; ++i) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
}

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t)>& fn) {
  parallel_chunks_indexed(n, chunk_size,
                          [&](std::size_t, std::size_t b, std::size_t e) { fn(b, e); });
}

}  // namespace ocs
