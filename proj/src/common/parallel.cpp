// SPDX-License-Identifier: Apache-2.0

#include "apl/common/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace apl {
namespace {
std::atomic<std::size_t> g_threads{1};
}  // namespace

void set_num_threads(std::size_t n) { g_threads.store(std::max<std::size_t>(1, n)); }

std::size_t num_threads() { return g_threads.load(); }

std::size_t chunk_count(std::size_t n) {
  if (n == 0) return 0;
  return std::min(n, num_threads());
}

void parallel_chunks(std::size_t n,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  const std::size_t chunks = chunk_count(n);
  if (chunks == 0) return;
  if (chunks == 1) {
    fn(0, n, 0);
    return;
  }
  const std::size_t base = n / chunks;
  const std::size_t extra = n % chunks;
  std::exception_ptr first_error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    workers.reserve(chunks - 1);
    std::size_t begin = 0;
    for (std::size_t c = 0; c < chunks; ++c) {
      const std::size_t end = begin + base + (c < extra ? 1 : 0);
      auto task = [&, begin, end, c] {
        try {
          fn(begin, end, c);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      };
      if (c + 1 == chunks) {
        task();
      } else {
        workers.emplace_back(task);
      }
      begin = end;
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace apl
