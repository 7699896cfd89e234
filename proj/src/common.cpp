#include "gsdefend/common.hpp"

#include <cstdlib>
#include <thread>
#include <vector>

namespace gsd {

int worker_count() {
  if (const char* env = std::getenv("GSDEFEND_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return int(v);
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? int(hc) : 1;
}

void parallel_chunks(int n, const std::function<void(int, int)>& f) {
  if (n <= 0) return;
  int workers = worker_count();
  if (workers > n) workers = n;
  if (workers <= 1) {
    f(0, n);
    return;
  }
  // fixed partition: first (n % workers) chunks get one extra element
  int base = n / workers, extra = n % workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  int begin = 0;
  for (int w = 0; w < workers; ++w) {
    int len = base + (w < extra ? 1 : 0);
    int end = begin + len;
    pool.emplace_back([&f, begin, end] { f(begin, end); });
    begin = end;
  }
  for (auto& t : pool) t.join();
}

}  // namespace gsd
