#include "flexmh/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace flexmh {

std::size_t worker_count() {
  std::size_t n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("FLEXMH_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<std::size_t>(n, static_cast<std::size_t>(cap));
  }
  return n;
}

void parallel_chunks(std::size_t total, std::size_t chunk_count,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (total == 0) return;
  chunk_count = std::min(chunk_count, total);
  const auto chunk_bounds = [&](std::size_t c) {
    const std::size_t begin = total * c / chunk_count;
    const std::size_t end = total * (c + 1) / chunk_count;
    return std::pair<std::size_t, std::size_t>{begin, end};
  };

  const std::size_t workers = std::min(worker_count(), chunk_count);
  if (workers <= 1) {
    for (std::size_t c = 0; c < chunk_count; ++c) {
      const auto [b, e] = chunk_bounds(c);
      fn(c, b, e);
    }
    return;
  }

  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t c = next.fetch_add(1); c < chunk_count; c = next.fetch_add(1)) {
        const auto [b, e] = chunk_bounds(c);
        fn(c, b, e);
      }
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace flexmh
