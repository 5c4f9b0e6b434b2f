#include "vmilan/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace vmilan {

namespace {
std::atomic<int> g_threads{1};
}

void set_thread_count(int threads) { g_threads = std::max(1, threads); }

int thread_count() { return g_threads; }

void configure_threads_from_env() {
  if (const char* env = std::getenv("VMILAN_THREADS")) {
    set_thread_count(std::atoi(env));
  }
}

void parallel_for(Index count, const std::function<void(Index, Index)>& body) {
  const Index workers = std::min<Index>(thread_count(), count);
  if (workers <= 1) {
    if (count > 0) body(0, count);
    return;
  }
  const Index chunk = (count + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (Index w = 0; w < workers; ++w) {
    const Index begin = w * chunk;
    const Index end = std::min(count, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] { body(begin, end); });
  }
}

}  // namespace vmilan
