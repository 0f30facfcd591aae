#include "codedstereo/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace cs {

namespace {
thread_local bool in_parallel_region = false;
}

int thread_count() {
  int hw = static_cast<int>(std::thread::hardware_concurrency());
  if (hw <= 0) hw = 1;
  if (const char* env = std::getenv("CODEDSTEREO_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<int>(std::min<long>(v, 1024));
  }
  return hw;
}

void parallel_for(int begin, int end, const std::function<void(int)>& fn) {
  const int n = end - begin;
  if (n <= 0) return;
  const int workers = std::min(thread_count(), n);
  if (workers <= 1 || in_parallel_region) {
    for (int i = begin; i < end; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const int lo = begin + static_cast<int>(static_cast<long long>(n) * w / workers);
    const int hi = begin + static_cast<int>(static_cast<long long>(n) * (w + 1) / workers);
    pool.emplace_back([lo, hi, &fn] {
      in_parallel_region = true;
      for (int i = lo; i < hi; ++i) fn(i);
      in_parallel_region = false;
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace cs
