#include "kineticlab/threads.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace kb {

int worker_count() {
  static int n = [] {
    const char* env = std::getenv("KB_THREADS");
    if (!env) return 1;
    int v = std::atoi(env);
    return v >= 1 ? v : 1;
  }();
  return n;
}

void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const int workers = worker_count();
  if (workers == 1 || n == 1) {
    fn(0, n);
    return;
  }
  // Chunk geometry depends only on n, never on the worker count.
  const std::size_t chunk = std::max<std::size_t>(1, n / 64);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) break;
      const std::size_t lo = c * chunk;
      fn(lo, std::min(n, lo + chunk));
    }
  };
  std::vector<std::thread> pool;
  for (int i = 1; i < workers; ++i) pool.emplace_back(body);
  body();
  for (auto& t : pool) t.join();
}

}  // namespace kb
