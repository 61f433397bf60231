#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "core/model.hpp"

namespace delaylab {

// Euler path X(t_i) of one problem on one Brownian path.
struct SolutionPath {
  TimeMesh mesh{1.0, 1};
  std::uint64_t seed = 0;
  std::vector<double> values;  // size N+1, values[0] = phi(0)
};

// Delay expressed in mesh steps. The delay must sit on the mesh
// (|tau/h - round(tau/h)| <= 1e-9): interpolating the lagged state would
// inject a mesh-dependent bias into the measured rates.
std::int64_t delay_lag(const DelaySdeProblem& problem, const TimeMesh& mesh);

// Left-point Euler-Maruyama step for the delay SDE:
//   X_{i+1} = X_i + b(t_i, X_i, X_{i-lag}) h + sigma(t_i, X_i, X_{i-lag}) dB_i
// with X(s) = phi(s) for s <= 0. With tau = 0 this reduces step-for-step to
// plain Euler-Maruyama on the same path.
SolutionPath solve_euler_delay(const DelaySdeProblem& problem,
                               const BrownianPath& path);
void solve_euler_delay_into(const DelaySdeProblem& problem,
                            const BrownianPath& path, SolutionPath& out);

// Lag approximation of a y-independent base problem with zero delay: the
// approximant with lag 1/n is itself a delay SDE with
//   b~(t,x,y) = b(t,y), sigma~(t,x,y) = sigma(t,y), phi = base phi(0),
// so every delay-SDE facility (including the variational solvers) applies to
// the scheme unchanged.
DelaySdeProblem build_caratheodory_problem(const DelaySdeProblem& base,
                                           std::int64_t n);

// Two problems driven by the same increments (common random numbers).
std::pair<SolutionPath, SolutionPath> solve_pair_coupled(
    const DelaySdeProblem& first, const DelaySdeProblem& second,
    const BrownianPath& path);

// State at t_i - tau: mesh lookup for i >= lag, initial segment otherwise.
inline double delayed_state(const std::vector<double>& values,
                            const DelaySdeProblem& problem, const TimeMesh& mesh,
                            std::int64_t i, std::int64_t lag) {
  return i >= lag ? values[std::size_t(i - lag)]
                  : problem.initial(mesh.node(i) - problem.delay);
}

}  // namespace delaylab
