#include "core/malliavin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaylab {
namespace {

inline double square(double v) { return v * v; }

// Trapezoid weight over an inclusive grid row range [0, count].
inline double trap_weight(std::int64_t j, std::int64_t count) {
  return (j == 0 || j == count) ? 0.5 : 1.0;
}

void check_grid(std::int64_t steps, std::int64_t grid_count) {
  if (grid_count < 1 || grid_count > steps || steps % grid_count != 0) {
    std::ostringstream os;
    os << "grid size " << grid_count << " must divide the step count " << steps;
    raise(Errc::invalid_argument, os.str());
  }
}

// Node index of t on both the mesh and the theta grid.
std::int64_t grid_time_index(const TimeMesh& mesh, double t,
                             std::int64_t stride) {
  const std::int64_t idx = mesh.aligned_index(t);
  if (idx % stride != 0) {
    std::ostringstream os;
    os << "time " << t << " is not a node of the derivative grid";
    raise(Errc::invalid_argument, os.str());
  }
  return idx;
}

}  // namespace

void evaluate_path_coefficients(const DelaySdeProblem& problem,
                                const SolutionPath& x, bool second_partials,
                                PathCoefficients& out) {
  if (!problem.drift.has_first_partials() ||
      !problem.diffusion.has_first_partials())
    raise(Errc::capability,
          "problem coefficients lack first partial derivatives");
  if (second_partials && (!problem.drift.has_second_partials() ||
                          !problem.diffusion.has_second_partials()))
    raise(Errc::capability,
          "problem coefficients lack second partial derivatives");
  const TimeMesh& mesh = x.mesh;
  const std::int64_t n = mesh.steps();
  const std::int64_t lag = delay_lag(problem, mesh);
  out.lag = lag;
  out.second = second_partials;
  const auto count = std::size_t(n) + 1;
  out.b2.resize(count);
  out.b3.resize(count);
  out.s2.resize(count);
  out.s3.resize(count);
  if (second_partials) {
    out.b22.resize(count);
    out.b23.resize(count);
    out.b33.resize(count);
    out.s22.resize(count);
    out.s23.resize(count);
    out.s33.resize(count);
  }
  for (std::int64_t i = 0; i <= n; ++i) {
    const double t = mesh.node(i);
    const double xi = x.values[std::size_t(i)];
    const double yi = delayed_state(x.values, problem, mesh, i, lag);
    out.b2[std::size_t(i)] = problem.drift.dx(t, xi, yi);
    out.b3[std::size_t(i)] = problem.drift.dy(t, xi, yi);
    out.s2[std::size_t(i)] = problem.diffusion.dx(t, xi, yi);
    out.s3[std::size_t(i)] = problem.diffusion.dy(t, xi, yi);
    if (second_partials) {
      out.b22[std::size_t(i)] = problem.drift.dxx(t, xi, yi);
      out.b23[std::size_t(i)] = problem.drift.dxy(t, xi, yi);
      out.b33[std::size_t(i)] = problem.drift.dyy(t, xi, yi);
      out.s22[std::size_t(i)] = problem.diffusion.dxx(t, xi, yi);
      out.s23[std::size_t(i)] = problem.diffusion.dxy(t, xi, yi);
      out.s33[std::size_t(i)] = problem.diffusion.dyy(t, xi, yi);
    }
  }
}

void solve_first_variation_into(const DelaySdeProblem& problem,
                                const SolutionPath& x, const BrownianPath& path,
                                const PathCoefficients& pc,
                                std::int64_t theta_index, std::int64_t t_end,
                                double* values) {
  const TimeMesh& mesh = x.mesh;
  const std::int64_t lag = pc.lag;
  const double h = mesh.step();
  const double* db = path.increments.data();
  // Adaptedness: D_theta X(s) = 0 for s < theta; the explicit zeros also
  // gate the lagged lookups below.
  const std::int64_t zero_end = std::min(theta_index, t_end + 1);
  for (std::int64_t j = 0; j < zero_end; ++j) values[j] = 0.0;
  if (theta_index > t_end) return;
  const double y_theta =
      delayed_state(x.values, problem, mesh, theta_index, lag);
  values[theta_index] = problem.diffusion.value(
      mesh.node(theta_index), x.values[std::size_t(theta_index)], y_theta);
  for (std::int64_t i = theta_index; i < t_end; ++i) {
    const double vi = values[i];
    const double vd = i - lag >= 0 ? values[i - lag] : 0.0;
    values[i + 1] =
        vi + (pc.b2[std::size_t(i)] * vi + pc.b3[std::size_t(i)] * vd) * h +
        (pc.s2[std::size_t(i)] * vi + pc.s3[std::size_t(i)] * vd) * db[i];
  }
}

std::vector<double> solve_first_variation(const DelaySdeProblem& problem,
                                          const SolutionPath& x,
                                          const BrownianPath& path,
                                          std::int64_t theta_index) {
  if (!(x.mesh == path.mesh))
    raise(Errc::invalid_argument, "solution and path live on different meshes");
  const std::int64_t n = x.mesh.steps();
  if (theta_index < 0 || theta_index > n)
    raise(Errc::alignment, "theta must be a mesh node index in [0, N]");
  PathCoefficients pc;
  evaluate_path_coefficients(problem, x, false, pc);
  std::vector<double> values(std::size_t(n) + 1);
  solve_first_variation_into(problem, x, path, pc, theta_index, n,
                             values.data());
  return values;
}

DerivativeField derivative_field(const DelaySdeProblem& problem,
                                 const SolutionPath& x,
                                 const BrownianPath& path,
                                 std::int64_t grid_count) {
  if (!(x.mesh == path.mesh))
    raise(Errc::invalid_argument, "solution and path live on different meshes");
  const std::int64_t n = x.mesh.steps();
  check_grid(n, grid_count);
  DerivativeField field;
  field.mesh = x.mesh;
  field.grid_count = grid_count;
  field.grid_stride = n / grid_count;
  field.values.resize(std::size_t(grid_count + 1) * std::size_t(n + 1));
  PathCoefficients pc;
  evaluate_path_coefficients(problem, x, false, pc);
  for (std::int64_t j = 0; j <= grid_count; ++j)
    solve_first_variation_into(
        problem, x, path, pc, j * field.grid_stride, n,
        field.values.data() + std::size_t(j) * std::size_t(n + 1));
  return field;
}

double malliavin_norm_sq(const DerivativeField& field, std::int64_t t_index) {
  const std::int64_t n = field.mesh.steps();
  if (t_index < 0 || t_index > n)
    raise(Errc::invalid_argument, "t lies outside the field range");
  if (t_index % field.grid_stride != 0)
    raise(Errc::invalid_argument, "t is not a node of the derivative grid");
  const std::int64_t panels = t_index / field.grid_stride;
  if (panels == 0) return 0.0;
  double wsum = 0.0;
  for (std::int64_t j = 0; j <= panels; ++j)
    wsum += trap_weight(j, panels) * square(field.at(j, t_index));
  // t * (wsum / panels) rather than (t/panels) * wsum: exact whenever the
  // integrand is constant, for any panel count.
  return field.mesh.node(t_index) * (wsum / double(panels));
}

namespace {

// D_r D_theta X integrated from max(r,theta) to t. `dr` and `dth` are full
// first-variation trajectories for r and theta; their adaptedness zeros gate
// every lagged term, so no explicit indicator is needed.
double second_variation_kernel(const PathCoefficients& pc,
                               const BrownianPath& path, const double* dr,
                               const double* dth, std::int64_t r,
                               std::int64_t th, std::int64_t t,
                               std::vector<double>& vbuf) {
  const std::int64_t lag = pc.lag;
  const std::int64_t s0 = std::max(r, th);
  const double h = path.mesh.step();
  const double* db = path.increments.data();
  auto at = [](const double* row, std::int64_t j) {
    return j >= 0 ? row[j] : 0.0;
  };
  if (vbuf.size() < std::size_t(t) + 1) vbuf.resize(std::size_t(t) + 1);
  double* v = vbuf.data();
  for (std::int64_t j = std::max<std::int64_t>(0, s0 - lag); j < s0; ++j)
    v[j] = 0.0;
  v[s0] = pc.s2[std::size_t(th)] * at(dr, th) +
          pc.s3[std::size_t(th)] * at(dr, th - lag) +
          pc.s2[std::size_t(r)] * at(dth, r) +
          pc.s3[std::size_t(r)] * at(dth, r - lag);
  for (std::int64_t i = s0; i < t; ++i) {
    const std::size_t k = std::size_t(i);
    const double vi = v[i];
    const double vl = i - lag >= 0 ? v[i - lag] : 0.0;
    const double dra = dr[i], dta = dth[i];
    const double drl = at(dr, i - lag), dtl = at(dth, i - lag);
    const double ddt = (pc.b22[k] * dra + pc.b23[k] * drl) * dta +
                       pc.b2[k] * vi +
                       (pc.b23[k] * dra + pc.b33[k] * drl) * dtl +
                       pc.b3[k] * vl;
    const double ddb = (pc.s22[k] * dra + pc.s23[k] * drl) * dta +
                       pc.s2[k] * vi +
                       (pc.s23[k] * dra + pc.s33[k] * drl) * dtl +
                       pc.s3[k] * vl;
    v[i + 1] = vi + ddt * h + ddb * db[i];
  }
  return v[t];
}

}  // namespace

double solve_second_variation(const DelaySdeProblem& problem,
                              const SolutionPath& x, const BrownianPath& path,
                              const DerivativeField& field,
                              std::int64_t r_index, std::int64_t theta_index,
                              std::int64_t t_index) {
  const std::int64_t n = x.mesh.steps();
  if (r_index < 0 || theta_index < 0 || t_index > n || r_index > t_index ||
      theta_index > t_index)
    raise(Errc::invalid_argument, "need r, theta <= t <= T on the mesh");
  if (r_index % field.grid_stride != 0 || theta_index % field.grid_stride != 0)
    raise(Errc::invalid_argument, "r and theta must be derivative-grid nodes");
  PathCoefficients pc;
  evaluate_path_coefficients(problem, x, true, pc);
  const std::size_t width = std::size_t(n) + 1;
  const double* dr =
      field.values.data() + std::size_t(r_index / field.grid_stride) * width;
  const double* dth = field.values.data() +
                      std::size_t(theta_index / field.grid_stride) * width;
  std::vector<double> vbuf;
  return second_variation_kernel(pc, path, dr, dth, r_index, theta_index,
                                 t_index, vbuf);
}

SecondVariationGrid second_variation_grid(const DelaySdeProblem& problem,
                                          const SolutionPath& x,
                                          const BrownianPath& path,
                                          const DerivativeField& field,
                                          std::int64_t t_index) {
  const std::int64_t n = x.mesh.steps();
  if (t_index < 0 || t_index > n || t_index % field.grid_stride != 0)
    raise(Errc::invalid_argument, "t must be a derivative-grid node");
  const std::int64_t panels = t_index / field.grid_stride;
  PathCoefficients pc;
  evaluate_path_coefficients(problem, x, true, pc);
  SecondVariationGrid grid;
  grid.t_index = t_index;
  grid.grid_count = panels;
  grid.grid_stride = field.grid_stride;
  grid.values.resize(std::size_t(panels + 1) * std::size_t(panels + 1));
  const std::size_t width = std::size_t(n) + 1;
  std::vector<double> vbuf;
  for (std::int64_t jr = 0; jr <= panels; ++jr) {
    const double* dr = field.values.data() + std::size_t(jr) * width;
    for (std::int64_t jt = 0; jt <= panels; ++jt) {
      const double* dth = field.values.data() + std::size_t(jt) * width;
      grid.values[std::size_t(jr) * std::size_t(panels + 1) +
                  std::size_t(jt)] =
          second_variation_kernel(pc, path, dr, dth, jr * field.grid_stride,
                                  jt * field.grid_stride, t_index, vbuf);
    }
  }
  return grid;
}

namespace {

struct NormWorkspace {
  BrownianPath path;
  SolutionPath x;
  PathCoefficients pc;
  std::vector<double> row;
};

void require_coupled(const DelaySdeProblem& a, const DelaySdeProblem& b) {
  if (a.horizon != b.horizon)
    raise(Errc::invalid_argument, "coupled problems must share the horizon");
  if (!(a.initial == b.initial))
    raise(Errc::invalid_argument,
          "coupled problems must share the initial segment");
}

}  // namespace

Estimate inverse_moment(const DelaySdeProblem& problem, std::int64_t steps,
                        double t, int p, std::int64_t paths,
                        std::int64_t grid_count, std::uint64_t seed,
                        int workers) {
  if (problem.sigma_lower <= 0.0)
    raise(Errc::ellipticity,
          "inverse moments need a uniform ellipticity bound sigma0 > 0");
  if (p < 1) raise(Errc::invalid_argument, "moment order p must be >= 1");
  if (paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  const TimeMesh mesh(problem.horizon, steps);
  check_grid(steps, grid_count);
  const std::int64_t stride = steps / grid_count;
  const std::int64_t t_index = grid_time_index(mesh, t, stride);
  if (t_index == 0)
    raise(Errc::invalid_argument, "t must be positive for inverse moments");
  const std::int64_t panels = t_index / stride;
  const double t_value = mesh.node(t_index);

  std::vector<double> rows;
  run_paths(
      paths, seed, 0, workers, 1,
      [&](std::int64_t, std::uint64_t path_seed, double* out) {
        thread_local NormWorkspace ws;
        sample_brownian_into(mesh, path_seed, ws.path);
        solve_euler_delay_into(problem, ws.path, ws.x);
        evaluate_path_coefficients(problem, ws.x, false, ws.pc);
        ws.row.resize(std::size_t(t_index) + 1);
        double wsum = 0.0;
        for (std::int64_t j = 0; j <= panels; ++j) {
          solve_first_variation_into(problem, ws.x, ws.path, ws.pc, j * stride,
                                     t_index, ws.row.data());
          wsum += trap_weight(j, panels) * square(ws.row[std::size_t(t_index)]);
        }
        const double norm_sq = t_value * (wsum / double(panels));
        double inv = 1.0 / norm_sq;
        double value = inv;
        for (int k = 1; k < p; ++k) value *= inv;
        out[0] = value;
      },
      rows);
  return mean_estimate(rows);
}

Estimate sobolev_distance(const DelaySdeProblem& first,
                          const DelaySdeProblem& second, std::int64_t steps,
                          double t, std::int64_t paths, std::int64_t grid_count,
                          std::uint64_t seed, int workers) {
  require_coupled(first, second);
  if (paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  const TimeMesh mesh(first.horizon, steps);
  check_grid(steps, grid_count);
  const std::int64_t stride = steps / grid_count;
  const std::int64_t t_index = grid_time_index(mesh, t, stride);
  const std::int64_t panels = t_index / stride;
  const double t_value = mesh.node(t_index);

  struct Workspace {
    BrownianPath path;
    SolutionPath x1, x2;
    PathCoefficients pc1, pc2;
    std::vector<double> row1, row2;
  };

  std::vector<double> rows;
  run_paths(
      paths, seed, 0, workers, 1,
      [&](std::int64_t, std::uint64_t path_seed, double* out) {
        thread_local Workspace ws;
        sample_brownian_into(mesh, path_seed, ws.path);
        solve_euler_delay_into(first, ws.path, ws.x1);
        solve_euler_delay_into(second, ws.path, ws.x2);
        evaluate_path_coefficients(first, ws.x1, false, ws.pc1);
        evaluate_path_coefficients(second, ws.x2, false, ws.pc2);
        ws.row1.resize(std::size_t(t_index) + 1);
        ws.row2.resize(std::size_t(t_index) + 1);
        double wsum = 0.0;
        for (std::int64_t j = 0; j <= panels; ++j) {
          solve_first_variation_into(first, ws.x1, ws.path, ws.pc1, j * stride,
                                     t_index, ws.row1.data());
          solve_first_variation_into(second, ws.x2, ws.path, ws.pc2, j * stride,
                                     t_index, ws.row2.data());
          wsum += trap_weight(j, panels) *
                  square(ws.row1[std::size_t(t_index)] -
                         ws.row2[std::size_t(t_index)]);
        }
        const double deriv_part =
            panels > 0 ? t_value * (wsum / double(panels)) : 0.0;
        out[0] = square(ws.x1.values[std::size_t(t_index)] -
                        ws.x2.values[std::size_t(t_index)]) +
                 deriv_part;
      },
      rows);
  const Estimate mean_sq = mean_estimate(rows);
  Estimate out;
  out.value = std::sqrt(std::max(0.0, mean_sq.value));
  out.std_err = out.value > 0.0 ? mean_sq.std_err / (2.0 * out.value) : 0.0;
  return out;
}

namespace {

// First-order delta method for a product of square roots of two Monte Carlo
// means; ingredient estimators are treated as independent.
Estimate sqrt_product(const Estimate& a, const Estimate& b) {
  Estimate out;
  out.value = std::sqrt(std::max(0.0, a.value) * std::max(0.0, b.value));
  if (out.value > 0.0) {
    double rel_sq = 0.0;
    if (a.value > 0.0) rel_sq += square(a.std_err / (2.0 * a.value));
    if (b.value > 0.0) rel_sq += square(b.std_err / (2.0 * b.value));
    out.std_err = out.value * std::sqrt(rel_sq);
  }
  return out;
}

bool noisy(const Estimate& e) {
  if (e.value == 0.0) return e.std_err > 0.0;
  return e.std_err > 0.5 * std::abs(e.value);
}

}  // namespace

WeakBoundReport weak_bound_report(const DelaySdeProblem& first,
                                  const DelaySdeProblem& second,
                                  const TestFunction& g, std::int64_t steps,
                                  double t, std::int64_t paths,
                                  std::int64_t grid_count, std::uint64_t seed,
                                  int workers) {
  require_coupled(first, second);
  if (first.sigma_lower <= 0.0)
    raise(Errc::ellipticity,
          "the weak bound needs a uniform ellipticity bound sigma0 > 0 on the "
          "first problem");
  if (g.bound > 1.0 + 1e-12)
    raise(Errc::validation, "test function bound must not exceed 1");
  if (paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  const TimeMesh mesh(first.horizon, steps);
  check_grid(steps, grid_count);
  const std::int64_t stride = steps / grid_count;
  const std::int64_t t_index = grid_time_index(mesh, t, stride);
  if (t_index == 0)
    raise(Errc::invalid_argument, "t must be positive for the weak bound");
  const std::int64_t panels = t_index / stride;
  const double t_value = mesh.node(t_index);
  const std::size_t row_width = std::size_t(t_index) + 1;

  struct Workspace {
    BrownianPath path;
    SolutionPath x1, x2;
    PathCoefficients pc1, pc2;
    std::vector<double> mat1, row2, vbuf;
  };

  enum : std::size_t { kGDiff, kMeanSq, kDerivSq, kInv2, kInv8, kDdfSq, kWidth };

  std::vector<double> rows;
  run_paths(
      paths, seed, 0, workers, kWidth,
      [&](std::int64_t, std::uint64_t path_seed, double* out) {
        thread_local Workspace ws;
        sample_brownian_into(mesh, path_seed, ws.path);
        solve_euler_delay_into(first, ws.path, ws.x1);
        solve_euler_delay_into(second, ws.path, ws.x2);
        evaluate_path_coefficients(first, ws.x1, true, ws.pc1);
        evaluate_path_coefficients(second, ws.x2, false, ws.pc2);
        ws.mat1.resize(std::size_t(panels + 1) * row_width);
        ws.row2.resize(row_width);
        double wsum_d = 0.0, wsum_dd = 0.0;
        for (std::int64_t j = 0; j <= panels; ++j) {
          double* row1 = ws.mat1.data() + std::size_t(j) * row_width;
          solve_first_variation_into(first, ws.x1, ws.path, ws.pc1, j * stride,
                                     t_index, row1);
          solve_first_variation_into(second, ws.x2, ws.path, ws.pc2,
                                     j * stride, t_index, ws.row2.data());
          const double w = trap_weight(j, panels);
          const double d1 = row1[std::size_t(t_index)];
          wsum_d += w * square(d1);
          wsum_dd += w * square(d1 - ws.row2[std::size_t(t_index)]);
        }
        const double norm_sq = t_value * (wsum_d / double(panels));
        double qsum = 0.0;
        for (std::int64_t jr = 0; jr <= panels; ++jr) {
          const double* dr = ws.mat1.data() + std::size_t(jr) * row_width;
          const double wr = trap_weight(jr, panels);
          for (std::int64_t jt = 0; jt <= panels; ++jt) {
            const double* dth = ws.mat1.data() + std::size_t(jt) * row_width;
            const double v = second_variation_kernel(
                ws.pc1, ws.path, dr, dth, jr * stride, jt * stride, t_index,
                ws.vbuf);
            qsum += wr * trap_weight(jt, panels) * square(v);
          }
        }
        const double ddf =
            t_value * t_value * (qsum / double(panels * panels));
        const double f1 = ws.x1.values[std::size_t(t_index)];
        const double f2 = ws.x2.values[std::size_t(t_index)];
        const double inv = 1.0 / norm_sq;
        out[kGDiff] = g(f1) - g(f2);
        out[kMeanSq] = square(f1 - f2);
        out[kDerivSq] = t_value * (wsum_dd / double(panels));
        out[kInv2] = inv;
        out[kInv8] = square(square(inv));
        out[kDdfSq] = square(ddf);
      },
      rows);

  WeakBoundReport report;
  report.paths = paths;
  const Estimate g_mean = column_estimate(rows, kWidth, kGDiff);
  report.lhs = {std::abs(g_mean.value), g_mean.std_err};
  report.mean_sq_diff = column_estimate(rows, kWidth, kMeanSq);
  report.deriv_sq_diff = column_estimate(rows, kWidth, kDerivSq);
  report.inv_norm2 = column_estimate(rows, kWidth, kInv2);
  report.inv_norm8 = column_estimate(rows, kWidth, kInv8);
  report.ddf_sq = column_estimate(rows, kWidth, kDdfSq);

  const Estimate tail = sqrt_product(report.ddf_sq, report.inv_norm8);
  report.delta2_bound.value = report.inv_norm2.value + 10.0 * tail.value;
  report.delta2_bound.std_err = std::sqrt(
      square(report.inv_norm2.std_err) + square(10.0 * tail.std_err));
  report.term_a = sqrt_product(report.mean_sq_diff, report.delta2_bound);
  report.term_b = sqrt_product(report.deriv_sq_diff, report.inv_norm2);

  const double margin =
      2.0 * std::sqrt(square(report.lhs.std_err) + square(report.term_a.std_err) +
                      square(report.term_b.std_err));
  report.inequality_satisfied =
      report.lhs.value <= report.term_a.value + report.term_b.value + margin;
  report.low_confidence = noisy(report.mean_sq_diff) ||
                          noisy(report.deriv_sq_diff) ||
                          noisy(report.inv_norm2) || noisy(report.inv_norm8) ||
                          noisy(report.ddf_sq);
  return report;
}

}  // namespace delaylab
