#ifndef RATEVAL_PARALLEL_H_
#define RATEVAL_PARALLEL_H_

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rateval {

// Runs fn(i) for i in [0, n) on up to `workers` threads. Work items must
// write only to their own output slot. If any item throws, the exception
// from the lowest failing index is rethrown after all threads finish, so the
// reported failure does not depend on scheduling.
template <typename Fn>
void ParallelFor(std::size_t n, unsigned workers, Fn&& fn) {
  workers = std::max(1u, workers);
  if (workers == 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mu;
  std::size_t error_index = n;
  std::exception_ptr error;

  auto run = [&] {
    for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (i < error_index) {
          error_index = i;
          error = std::current_exception();
        }
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t count = std::min<std::size_t>(workers, n);
    pool.reserve(count);
    for (std::size_t t = 0; t < count; ++t) pool.emplace_back(run);
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace rateval

#endif  // RATEVAL_PARALLEL_H_
