#include "precipgen/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace precipgen {

int default_thread_count() {
  if (const char* env = std::getenv("PRECIPGEN_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void for_each_partition(std::size_t n, int threads,
                        const std::function<void(const PartitionRange&)>& fn) {
  if (n == 0) return;
  const int parts = static_cast<int>(std::min<std::size_t>(kReductionPartitions, n));
  auto range_of = [&](int p) {
    return PartitionRange{p, n * static_cast<std::size_t>(p) / parts,
                          n * static_cast<std::size_t>(p + 1) / parts};
  };

  if (threads <= 1 || parts == 1) {
    for (int p = 0; p < parts; ++p) fn(range_of(p));
    return;
  }

  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  auto worker = [&] {
    for (;;) {
      int p = next.fetch_add(1);
      if (p >= parts) return;
      try {
        fn(range_of(p));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!error) error = std::current_exception();
      }
    }
  };

  const int workers = std::min(threads, parts);
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace precipgen
