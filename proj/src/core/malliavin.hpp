#pragma once

#include <cstdint>
#include <vector>

#include "core/model.hpp"
#include "core/parallel.hpp"
#include "core/solver.hpp"

namespace delaylab {

// Coefficient partials evaluated once along a solved path. Every variational
// solve along the same path then reduces to a linear recurrence over these
// arrays, so an (r,theta) grid of solves costs no further coefficient
// evaluations.
struct PathCoefficients {
  std::int64_t lag = 0;
  bool second = false;
  std::vector<double> b2, b3, s2, s3;                 // first partials, size N+1
  std::vector<double> b22, b23, b33, s22, s23, s33;   // second partials
};

void evaluate_path_coefficients(const DelaySdeProblem& problem,
                                const SolutionPath& x, bool second_partials,
                                PathCoefficients& out);

// First variational equation: linear delay SDE for D_theta X started at time
// theta from sigma(theta, X(theta), X(theta-tau)); the lagged terms activate
// only once s - tau >= theta, and D_theta X(s) = 0 for s < theta. Integrates
// up to t_end and writes values[0..t_end] (zeros before theta).
void solve_first_variation_into(const DelaySdeProblem& problem,
                                const SolutionPath& x, const BrownianPath& path,
                                const PathCoefficients& pc,
                                std::int64_t theta_index, std::int64_t t_end,
                                double* values);

std::vector<double> solve_first_variation(const DelaySdeProblem& problem,
                                          const SolutionPath& x,
                                          const BrownianPath& path,
                                          std::int64_t theta_index);

// D_theta X(t_i) over a theta grid of every (N/K)-th mesh node (K+1 rows
// including both endpoints); entries with theta > t are exactly zero.
struct DerivativeField {
  TimeMesh mesh{1.0, 1};
  std::int64_t grid_count = 0;   // K: number of grid panels over [0,T]
  std::int64_t grid_stride = 0;  // N/K
  std::vector<double> values;    // (K+1) x (N+1), row-major

  double at(std::int64_t row, std::int64_t node) const {
    return values[std::size_t(row) * std::size_t(mesh.steps() + 1) +
                  std::size_t(node)];
  }
  std::int64_t theta_index(std::int64_t row) const { return row * grid_stride; }
};

DerivativeField derivative_field(const DelaySdeProblem& problem,
                                 const SolutionPath& x,
                                 const BrownianPath& path,
                                 std::int64_t grid_count);

// Trapezoid quadrature of theta -> |D_theta X(t)|^2 over [0,t]; t must be a
// grid node. Exact for constant integrands by construction.
double malliavin_norm_sq(const DerivativeField& field, std::int64_t t_index);

// E[ ||DX(t)||^(-2p) ] over `paths` independent paths; requires a declared
// ellipticity bound sigma_lower > 0.
Estimate inverse_moment(const DelaySdeProblem& problem, std::int64_t steps,
                        double t, int p, std::int64_t paths,
                        std::int64_t grid_count, std::uint64_t seed,
                        int workers = 0);

// Second variational equation: linear equation for D_r D_theta X integrated
// from max(r,theta) to t. The boundary terms and all lagged contributions
// gate themselves through the adaptedness zeros of the first variation.
double solve_second_variation(const DelaySdeProblem& problem,
                              const SolutionPath& x, const BrownianPath& path,
                              const DerivativeField& field,
                              std::int64_t r_index, std::int64_t theta_index,
                              std::int64_t t_index);

// D_r D_theta X(t) over the (K+1) x (K+1) grid of a derivative field.
struct SecondVariationGrid {
  std::int64_t t_index = 0;
  std::int64_t grid_count = 0;
  std::int64_t grid_stride = 0;
  std::vector<double> values;  // (K+1) x (K+1), row r, column theta

  double at(std::int64_t r_row, std::int64_t theta_row) const {
    return values[std::size_t(r_row) * std::size_t(grid_count + 1) +
                  std::size_t(theta_row)];
  }
};

SecondVariationGrid second_variation_grid(const DelaySdeProblem& problem,
                                          const SolutionPath& x,
                                          const BrownianPath& path,
                                          const DerivativeField& field,
                                          std::int64_t t_index);

// Sobolev distance ||F1 - F2||_{1,2} between coupled terminal values:
// sqrt( E|X1(t)-X2(t)|^2 + E ||DX1(t)-DX2(t)||^2 ), fields on a shared
// theta grid, standard error by the delta method.
Estimate sobolev_distance(const DelaySdeProblem& first,
                          const DelaySdeProblem& second, std::int64_t steps,
                          double t, std::int64_t paths, std::int64_t grid_count,
                          std::uint64_t seed, int workers = 0);

// Integration-by-parts bound on |E g(F1) - E g(F2)| in its proof-level form
// with explicit constants 1 and 10:
//   lhs <= sqrt(E|F1-F2|^2) * sqrt(delta2_bound)
//        + sqrt(E||DF1-DF2||^2) * sqrt(E||DF1||^-2),
//   delta2_bound = E||DF1||^-2
//                + 10 * sqrt(E (iint |D_theta D_r F1|^2)^2) * sqrt(E||DF1||^-8).
// All ingredients are estimated on coupled paths.
struct WeakBoundReport {
  Estimate lhs;            // |E g(F1) - E g(F2)|
  Estimate mean_sq_diff;   // E |F1-F2|^2
  Estimate deriv_sq_diff;  // E ||DF1-DF2||^2
  Estimate inv_norm2;      // E ||DF1||^-2
  Estimate inv_norm8;      // E ||DF1||^-8
  Estimate ddf_sq;         // E ( iint |D_theta D_r F1|^2 dtheta dr )^2
  Estimate delta2_bound;
  Estimate term_a;
  Estimate term_b;
  bool inequality_satisfied = false;  // lhs <= A + B within combined 2 sigma
  bool low_confidence = false;        // some ingredient has std err > 50% of value
  std::int64_t paths = 0;
};

WeakBoundReport weak_bound_report(const DelaySdeProblem& first,
                                  const DelaySdeProblem& second,
                                  const TestFunction& g, std::int64_t steps,
                                  double t, std::int64_t paths,
                                  std::int64_t grid_count, std::uint64_t seed,
                                  int workers = 0);

}  // namespace delaylab
