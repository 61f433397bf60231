#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace delaylab {

// Monte Carlo estimate with its standard error.
struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

// Worker count: `requested` if positive, else the DELAYLAB_WORKERS
// environment variable, else hardware concurrency. Read on every call so a
// process can change the override between runs.
int resolve_workers(int requested);

// Fixed-shape pairwise tree summation; the result depends only on the order
// of the inputs, never on worker count or scheduling.
double pairwise_sum(std::span<const double> values);

// Mean and standard error of a sample, two-pass, deterministic.
Estimate mean_estimate(std::span<const double> values);

// Extracts column `col` of the row-major (paths x width) buffer and reduces
// it with mean_estimate.
Estimate column_estimate(const std::vector<double>& rows, std::size_t width,
                         std::size_t col);

// Parallel map over path indices 0..paths-1. Each path writes its `width`
// outputs into a preallocated slot keyed by its index, so results are
// bit-identical for any worker count; reductions happen afterwards in index
// order. `body(index, seed, out_row)` must be a pure function of its
// arguments.
void run_paths(std::int64_t paths, std::uint64_t master_seed,
               std::uint64_t stream, int workers, std::size_t width,
               const std::function<void(std::int64_t, std::uint64_t, double*)>&
                   body,
               std::vector<double>& rows);

}  // namespace delaylab
