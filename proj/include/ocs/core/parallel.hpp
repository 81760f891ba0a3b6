#pragma once

#include <cstddef>
#include <functional>

namespace ocs {

/// Global worker count for parallel loops. 0 = hardware concurrency.
void set_thread_count(int n);
int thread_count();

/// Splits [0, n) into fixed-size chunks and runs fn(begin, end) for each,
/// possibly on multiple threads. Chunk boundaries depend only on n and
/// chunk_size, never on the thread count, so any per-chunk output is
/// bit-identical for 1..N threads.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t)>& fn);

/// parallel_chunks with the chunk index exposed (for per-chunk accumulators
/// that are later merged in chunk order).
void parallel_chunks_indexed(
    std::size_t n, std::size_t chunk_size,
    const std::function<void(std::size_t chunk, std::size_t begin, std::size_t end)>& fn);

std::size_t num_chunks(std::size_t n, std::size_t chunk_size);

}  // namespace ocs
