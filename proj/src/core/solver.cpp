#include "core/solver.hpp"

#include <cmath>
#include <sstream>
#include <string>

namespace delaylab {

std::int64_t delay_lag(const DelaySdeProblem& problem, const TimeMesh& mesh) {
  if (problem.delay == 0.0) return 0;
  const double ratio = problem.delay / mesh.step();
  const double rounded = std::nearbyint(ratio);
  if (std::abs(ratio - rounded) > 1e-9) {
    std::ostringstream os;
    os << "delay tau=" << problem.delay
       << " is not an integer multiple of the mesh step " << mesh.step()
       << "; refine the mesh (delays are never interpolated)";
    raise(Errc::alignment, os.str());
  }
  return std::int64_t(rounded);
}

void solve_euler_delay_into(const DelaySdeProblem& problem,
                            const BrownianPath& path, SolutionPath& out) {
  const TimeMesh& mesh = path.mesh;
  if (mesh.horizon() != problem.horizon)
    raise(Errc::invalid_argument,
          "path mesh horizon does not match the problem horizon");
  const std::int64_t lag = delay_lag(problem, mesh);
  const std::int64_t n = mesh.steps();
  const double h = mesh.step();
  out.mesh = mesh;
  out.seed = path.seed;
  out.values.resize(std::size_t(n) + 1);

  const auto& b = problem.drift.value;
  const auto& s = problem.diffusion.value;
  const double* db = path.increments.data();
  double* x = out.values.data();
  x[0] = problem.initial(0.0);
  for (std::int64_t i = 0; i < n; ++i) {
    const double t = h * double(i);
    const double xi = x[i];
    const double y =
        i >= lag ? x[i - lag] : problem.initial(t - problem.delay);
    x[i + 1] = xi + b(t, xi, y) * h + s(t, xi, y) * db[i];
  }
}

SolutionPath solve_euler_delay(const DelaySdeProblem& problem,
                               const BrownianPath& path) {
  SolutionPath out;
  solve_euler_delay_into(problem, path, out);
  return out;
}

namespace {

// b~(t,x,y) = b(t,y): the x slot is ignored, derivatives move to the y slot.
CoefficientField lagged_field(const CoefficientField& base) {
  CoefficientField out;
  out.value = [v = base.value](double t, double, double y) { return v(t, y, y); };
  out.dx = [](double, double, double) { return 0.0; };
  out.dy = [d = base.dx](double t, double, double y) { return d(t, y, y); };
  out.dxx = [](double, double, double) { return 0.0; };
  out.dxy = [](double, double, double) { return 0.0; };
  if (base.dxx)
    out.dyy = [d = base.dxx](double t, double, double y) { return d(t, y, y); };
  out.lipschitz = base.lipschitz;
  out.depends_on_y = true;
  return out;
}

}  // namespace

DelaySdeProblem build_caratheodory_problem(const DelaySdeProblem& base,
                                           std::int64_t n) {
  if (n < 1) raise(Errc::invalid_argument, "Caratheodory index n must be >= 1");
  if (base.delay != 0.0)
    raise(Errc::invalid_argument,
          "Caratheodory base problem must have zero delay");
  if (base.drift.depends_on_y || base.diffusion.depends_on_y)
    raise(Errc::invalid_argument,
          "Caratheodory base coefficients must not depend on the lagged state");
  if (!base.drift.has_first_partials() || !base.diffusion.has_first_partials())
    raise(Errc::capability, "Caratheodory base lacks first partials");
  DelaySdeProblem p;
  p.name = base.name + "_caratheodory_n" + std::to_string(n);
  p.drift = lagged_field(base.drift);
  p.diffusion = lagged_field(base.diffusion);
  p.delay = 1.0 / double(n);
  p.horizon = base.horizon;
  p.initial = InitialSegment::constant(base.initial(0.0));
  p.sigma_lower = base.sigma_lower;
  return p;
}

std::pair<SolutionPath, SolutionPath> solve_pair_coupled(
    const DelaySdeProblem& first, const DelaySdeProblem& second,
    const BrownianPath& path) {
  if (first.horizon != second.horizon)
    raise(Errc::invalid_argument, "coupled problems must share the horizon");
  if (!(first.initial == second.initial))
    raise(Errc::invalid_argument,
          "coupled problems must share the initial segment");
  return {solve_euler_delay(first, path), solve_euler_delay(second, path)};
}

}  // namespace delaylab
