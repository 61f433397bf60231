#pragma once

// Test-only oracles, independent of the library's solver implementations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "core/model.hpp"
#include "core/solver.hpp"

namespace testsupport {

// Plain Euler-Maruyama for a no-delay SDE, written independently of the
// delay solver; used to check the tau = 0 reduction bit-for-bit.
inline std::vector<double> plain_euler(const delaylab::DelaySdeProblem& p,
                                       const delaylab::BrownianPath& path) {
  const auto& mesh = path.mesh;
  const std::int64_t n = mesh.steps();
  const double h = mesh.step();
  std::vector<double> x(std::size_t(n) + 1);
  x[0] = p.initial(0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = h * double(i);
    const double xi = x[std::size_t(i)];
    x[std::size_t(i) + 1] = xi + p.drift.value(t, xi, xi) * h +
                            p.diffusion.value(t, xi, xi) * path.increments[std::size_t(i)];
  }
  return x;
}

// Closed-form solution of dX = a X dt + s dB at the horizon, with the
// stochastic integral evaluated by a left-point sum on the given path:
//   X(T) = e^{aT} x0 + s * sum_j e^{a(T - t_j)} dB_j.
inline double linear_additive_closed_form(double a, double s, double x0,
                                          const delaylab::BrownianPath& path) {
  const auto& mesh = path.mesh;
  const double horizon = mesh.horizon();
  double integral = 0.0;
  for (std::int64_t j = 0; j < mesh.steps(); ++j)
    integral += std::exp(a * (horizon - mesh.node(j))) *
                path.increments[std::size_t(j)];
  return std::exp(a * horizon) * x0 + s * integral;
}

// Re-solves with the increment at `bump_index` shifted by eps and returns the
// pathwise difference quotient at every node: the finite-difference oracle
// for the first variation at theta = t_{bump_index}.
inline std::vector<double> bump_derivative(const delaylab::DelaySdeProblem& p,
                                           const delaylab::BrownianPath& path,
                                           std::int64_t bump_index,
                                           double eps) {
  delaylab::BrownianPath bumped = path;
  bumped.increments[std::size_t(bump_index)] += eps;
  const auto base = delaylab::solve_euler_delay(p, path);
  const auto shifted = delaylab::solve_euler_delay(p, bumped);
  std::vector<double> out(base.values.size());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = (shifted.values[i] - base.values[i]) / eps;
  return out;
}

// Second mixed difference over bumps at r and theta: the oracle for the
// second variation D_r D_theta X(t).
inline double double_bump_derivative(const delaylab::DelaySdeProblem& p,
                                     const delaylab::BrownianPath& path,
                                     std::int64_t r_index,
                                     std::int64_t theta_index, double eps,
                                     std::int64_t t_index) {
  auto solve_with = [&](double dr, double dth) {
    delaylab::BrownianPath b = path;
    b.increments[std::size_t(r_index)] += dr;
    b.increments[std::size_t(theta_index)] += dth;
    return delaylab::solve_euler_delay(p, b).values[std::size_t(t_index)];
  };
  const double pp = solve_with(eps, eps);
  const double p0 = solve_with(eps, 0.0);
  const double zp = solve_with(0.0, eps);
  const double zz = solve_with(0.0, 0.0);
  return (pp - p0 - zp + zz) / (eps * eps);
}

inline double rel_or_abs_error(double value, double reference, double abs_tol,
                               double rel_tol) {
  const double err = std::abs(value - reference);
  const double allowed = std::max(abs_tol, rel_tol * std::abs(reference));
  return err / allowed;  // <= 1 means within tolerance
}

}  // namespace testsupport
