#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "core/errors.hpp"

namespace delaylab {

// Uniform grid t_i = i*T/N on [0,T].
class TimeMesh {
 public:
  TimeMesh(double horizon, std::int64_t steps);

  double horizon() const { return horizon_; }
  std::int64_t steps() const { return steps_; }
  double step() const { return step_; }
  double node(std::int64_t i) const { return step_ * double(i); }

  // Index of a node with |time/h - round(time/h)| <= tol; throws an alignment
  // error otherwise. Off-mesh times are never silently interpolated.
  std::int64_t aligned_index(double time, double tol = 1e-9) const;

  bool operator==(const TimeMesh&) const = default;

 private:
  double horizon_;
  std::int64_t steps_;
  double step_;
};

// Brownian increments on a mesh. Node values B(t_i) are the primary data:
// coarsening subsamples them, so paths at different resolutions agree at
// shared nodes bit-for-bit and coarsening factors compose exactly.
struct BrownianPath {
  TimeMesh mesh{1.0, 1};
  std::uint64_t seed = 0;
  std::vector<double> increments;  // size N
  std::vector<double> nodes;       // size N+1, nodes[0] = 0
};

BrownianPath sample_brownian(const TimeMesh& mesh, std::uint64_t seed);
void sample_brownian_into(const TimeMesh& mesh, std::uint64_t seed,
                          BrownianPath& out);

// Sums consecutive groups of `factor` increments; factor must divide the
// step count.
BrownianPath coarsen_path(const BrownianPath& path, std::int64_t factor);

// Scalar coefficient (t,x,y) -> value with its partial derivatives in the
// state arguments. Second partials may be left empty when a problem is only
// solved pathwise; variational solvers check capability before using them.
struct CoefficientField {
  using Fn = std::function<double(double, double, double)>;
  Fn value;
  Fn dx, dy;            // d/dx, d/dy
  Fn dxx, dxy, dyy;     // second partials
  double lipschitz = 0.0;
  bool depends_on_y = true;

  bool has_first_partials() const { return bool(dx) && bool(dy); }
  bool has_second_partials() const {
    return bool(dxx) && bool(dxy) && bool(dyy);
  }
};

// Deterministic initial segment on t <= 0, closed form only: the delay
// experiments need exact Hölder control of the segment, not tabulated data.
struct InitialSegment {
  enum class Kind { constant, power_holder };

  Kind kind = Kind::constant;
  double x0 = 0.0;
  double c = 0.0;     // Hölder constant (power_holder)
  double beta = 1.0;  // Hölder exponent in (0,1]

  static InitialSegment constant(double x0);
  // phi(t) = x0 + c*|t|^beta, so |phi(s)-phi(t)| <= c|s-t|^beta.
  static InitialSegment power_holder(double x0, double c, double beta);

  double operator()(double t) const;

  bool operator==(const InitialSegment&) const = default;
};

// Scalar SDE with one constant delay:
//   dX(t) = b(t, X(t), X(t-tau)) dt + sigma(t, X(t), X(t-tau)) dB(t),
//   X(t) = phi(t) on [-tau, 0].
struct DelaySdeProblem {
  std::string name;
  CoefficientField drift;      // b
  CoefficientField diffusion;  // sigma
  double delay = 0.0;          // tau >= 0
  double horizon = 1.0;        // T > 0
  InitialSegment initial;
  double sigma_lower = 0.0;    // declared uniform lower bound on |sigma|
};

// Checks tau >= 0, T > 0 and, when sigma_lower > 0, spot-checks ellipticity
// at quasi-random sample points.
void validate_problem(const DelaySdeProblem& problem);

// Bounded measurable test function with a declared sup-norm bound.
struct TestFunction {
  enum class Kind { indicator, sign, sine, custom };

  Kind kind = Kind::custom;
  double param = 0.0;
  double bound = 1.0;
  std::function<double(double)> fn;

  double operator()(double x) const { return fn(x); }

  static TestFunction indicator(double threshold);  // 1{x <= threshold}
  static TestFunction sign(double center);          // sign(x - center)
  static TestFunction sine(double frequency);       // sin(frequency * x)
  static TestFunction custom(std::function<double(double)> fn, double bound);
};

// Benchmark problems. All entries satisfy the standing regularity
// assumptions (global Lipschitz coefficients, bounded second partials) by
// construction; metadata (L, sigma0) is populated analytically.
DelaySdeProblem catalog_problem(const std::string& name,
                                const std::map<std::string, double>& params,
                                double tau, double horizon,
                                const InitialSegment& phi);
std::vector<std::string> catalog_names();
std::string catalog_describe(const std::string& name);

// Max over quasi-random sample points of the mismatch between analytic
// partials and central finite differences, scaled by 1+|analytic|.
double finite_difference_deviation(const CoefficientField& field,
                                   double horizon, int points,
                                   std::uint64_t seed);

}  // namespace delaylab
