#include "core/parallel.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "core/rng.hpp"

namespace delaylab {

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("DELAYLAB_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? int(hc) : 1;
}

double pairwise_sum(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n <= 16) {
    double s = 0.0;
    for (const double v : values) s += v;
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

Estimate mean_estimate(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) return {};
  const double mean = pairwise_sum(values) / double(n);
  if (n == 1) return {mean, 0.0};
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = values[i] - mean;
    sq[i] = d * d;
  }
  const double var = pairwise_sum(sq) / double(n - 1);
  return {mean, std::sqrt(var / double(n))};
}

Estimate column_estimate(const std::vector<double>& rows, std::size_t width,
                         std::size_t col) {
  const std::size_t paths = width == 0 ? 0 : rows.size() / width;
  std::vector<double> column(paths);
  for (std::size_t p = 0; p < paths; ++p) column[p] = rows[p * width + col];
  return mean_estimate(column);
}

void run_paths(std::int64_t paths, std::uint64_t master_seed,
               std::uint64_t stream, int workers, std::size_t width,
               const std::function<void(std::int64_t, std::uint64_t, double*)>&
                   body,
               std::vector<double>& rows) {
  rows.assign(std::size_t(paths) * width, 0.0);
  int count = resolve_workers(workers);
  if (std::int64_t(count) > paths) count = int(paths > 0 ? paths : 1);

  std::atomic<std::int64_t> next{0};
  std::atomic<bool> stop{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::int64_t kBlock = 16;

  auto work = [&] {
    for (;;) {
      const std::int64_t begin = next.fetch_add(kBlock);
      if (begin >= paths || stop.load(std::memory_order_relaxed)) break;
      const std::int64_t end = std::min(begin + kBlock, paths);
      try {
        for (std::int64_t p = begin; p < end; ++p)
          body(p, rng::path_seed(master_seed, stream, std::uint64_t(p)),
               rows.data() + std::size_t(p) * width);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        stop.store(true, std::memory_order_relaxed);
        break;
      }
    }
  };

  if (count <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(std::size_t(count));
    for (int w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace delaylab
