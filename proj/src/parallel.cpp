#include "qmf/parallel.hpp"

#include <cstdlib>
#include <string>

namespace qmf {

unsigned default_thread_count() {
  if (const char* env = std::getenv("QMF_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<unsigned>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? hw : 1;
}

void parallel_blocks(std::size_t n_blocks, unsigned n_threads,
                     const std::function<void(std::size_t)>& work) {
  if (n_blocks == 0) return;
  if (n_threads <= 1 || n_blocks == 1) {
    for (std::size_t b = 0; b < n_blocks; ++b) work(b);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t b = next.fetch_add(1);
      if (b >= n_blocks) return;
      work(b);
    }
  };
  std::vector<std::thread> pool;
  const unsigned n = std::min<std::size_t>(n_threads, n_blocks);
  pool.reserve(n - 1);
  for (unsigned i = 1; i < n; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

}  // namespace qmf
