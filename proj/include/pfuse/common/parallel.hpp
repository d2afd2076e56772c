#pragma once

#include <cstddef>
#include <functional>

namespace pfuse {

/// Worker thread cap: PARETO_FUSE_THREADS when set to a positive integer,
/// otherwise the hardware concurrency (at least 1).
std::size_t worker_threads();

/// Runs fn(chunk_index, begin, end) over [0, n) split into fixed-size chunks.
/// Chunk boundaries depend only on n and chunk_size, so results gathered by
/// chunk index are identical for any thread count.
void parallel_chunks(std::size_t n, std::size_t chunk_size, std::size_t threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

}  // namespace pfuse
