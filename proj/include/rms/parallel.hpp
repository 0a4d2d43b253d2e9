#ifndef RMS_PARALLEL_HPP
#define RMS_PARALLEL_HPP

#include <atomic>
#include <cstdint>
#include <exception>
#include <thread>
#include <vector>

namespace rms {

// Runs f(i) for i in [0, count) across up to `jobs` threads. Work items must
// write results into pre-sized slots indexed by i so the reduction order is
// fixed and independent of scheduling. The first exception (lowest index)
// is rethrown after all workers join.
template <typename F>
void parallel_for(std::int64_t count, int jobs, F&& f) {
  if (count <= 0) return;
  if (jobs <= 1 || count == 1) {
    for (std::int64_t i = 0; i < count; ++i) f(i);
    return;
  }
  int workers = static_cast<int>(std::min<std::int64_t>(jobs, count));
  std::atomic<std::int64_t> next{0};
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          f(i);
        } catch (...) {
          errors[static_cast<std::size_t>(i)] = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace rms

#endif  // RMS_PARALLEL_HPP
