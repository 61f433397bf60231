#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "core/model.hpp"
#include "core/parallel.hpp"
#include "core/solver.hpp"

namespace delaylab {

enum class ErrorKind { strong_l2, strong_sup_l2, weak };

// One Monte Carlo error at one level. For the strong kinds `value` is the
// mean of the squared (sup-)difference; for the weak kind it is the absolute
// coupled mean difference of the test function.
struct ErrorEstimate {
  double value = 0.0;
  double std_err = 0.0;
  std::int64_t paths = 0;
  ErrorKind kind = ErrorKind::strong_l2;
  double level = 0.0;
};

// Least-squares line through (log level, log error).
struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  std::vector<double> levels;
};

RateFit fit_rate(std::span<const double> levels, std::span<const double> errors);

struct McOptions {
  std::int64_t paths = 0;
  std::int64_t steps = 0;
  std::uint64_t seed = 0;
  int workers = 0;  // 0: DELAYLAB_WORKERS env, then hardware concurrency
};

// E|X1(t)-X2(t)|^2 on coupled paths; with t empty, the sup over all mesh
// nodes of the squared difference.
ErrorEstimate strong_error(const DelaySdeProblem& first,
                           const DelaySdeProblem& second,
                           std::optional<double> t, const McOptions& opts);

// |E g(X1(t)) - E g(X2(t))|. Coupled estimation takes the pathwise
// difference on common random numbers; uncoupled uses two independent path
// sets and combines their standard errors.
ErrorEstimate weak_error(const DelaySdeProblem& first,
                         const DelaySdeProblem& second, const TestFunction& g,
                         double t, const McOptions& opts, bool coupled = true);

// One experiment row as written to reports. For strong experiments `error`
// is the RMS (square root of the mean squared sup-difference).
struct LevelRow {
  double level = 0.0;
  double error = 0.0;
  double std_err = 0.0;
  std::int64_t paths = 0;
  bool censored = false;  // |error| < 2 stderr: excluded from the rate fit
};

struct RateTable {
  std::vector<LevelRow> rows;
  std::optional<RateFit> fit;  // absent when fewer than 3 uncensored levels
};

// Lag-approximation rate experiment: for each n the approximant with lag 1/n
// is coupled with the zero-delay base on the same fine-mesh paths and the
// error at the horizon (sup over nodes for the strong variant) is estimated.
// `g` selects the weak variant; it requires sigma0 > 0.
RateTable caratheodory_rate_experiment(const DelaySdeProblem& base,
                                       std::span<const std::int64_t> levels,
                                       const McOptions& opts,
                                       const TestFunction* g);

// Weak error between X_{tau1} and X_{tau1+gap} at t = T across gap levels,
// coupled, with the rate fitted against the gap.
RateTable delay_continuity_experiment(const DelaySdeProblem& family,
                                      std::span<const double> gaps,
                                      const TestFunction& g,
                                      const McOptions& opts);

bool is_censored(double error, double std_err);

}  // namespace delaylab
