#ifndef DIAGOSC_PARALLEL_HPP
#define DIAGOSC_PARALLEL_HPP

#include <algorithm>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace diagosc {

/// Calls body(begin, end, chunk) over `threads` contiguous chunks of
/// [0, count). Chunk c always covers the same index range for a given
/// (count, threads); callers that write to disjoint slots get
/// thread-count-independent results. The first exception is rethrown.
template <typename Body>
void parallel_chunks(long count, int threads, Body&& body) {
  threads = std::max(1, std::min<int>(threads, static_cast<int>(std::max(1L, count))));
  if (threads == 1) {
    body(0L, count, 0);
    return;
  }
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int c = 0; c < threads; ++c) {
    const long begin = count * c / threads;
    const long end = count * (c + 1) / threads;
    pool.emplace_back([&, begin, end, c] {
      try {
        body(begin, end, c);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

/// Integer sum of predicate(i) over [0, count); order-independent.
template <typename Predicate>
long parallel_count(long count, int threads, Predicate&& predicate) {
  std::vector<long> partial(static_cast<std::size_t>(std::max(1, threads)), 0);
  parallel_chunks(count, threads, [&](long begin, long end, int chunk) {
    long local = 0;
    for (long i = begin; i < end; ++i) local += predicate(i) ? 1 : 0;
    partial[static_cast<std::size_t>(chunk)] = local;
  });
  long total = 0;
  for (long p : partial) total += p;
  return total;
}

}  // namespace diagosc

#endif  // DIAGOSC_PARALLEL_HPP
