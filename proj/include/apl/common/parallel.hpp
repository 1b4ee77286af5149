// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <functional>

namespace apl {

/// Worker cap used by every parallel loop in the library. Defaults to 1.
void set_num_threads(std::size_t n);
std::size_t num_threads();

/// Splits [0, n) into at most num_threads() contiguous chunks and runs
/// fn(begin, end, chunk_index) on each. Chunk boundaries depend only on n and
/// the thread count, so per-chunk partial results reduced in chunk order are
/// deterministic for a fixed thread count.
void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Number of chunks parallel_chunks(n, ...) will produce.
std::size_t chunk_count(std::size_t n);

}  // namespace apl
