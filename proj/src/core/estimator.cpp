#include "core/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace delaylab {
namespace {

inline double square(double v) { return v * v; }

void require_coupled(const DelaySdeProblem& a, const DelaySdeProblem& b) {
  if (a.horizon != b.horizon)
    raise(Errc::invalid_argument, "coupled problems must share the horizon");
  if (!(a.initial == b.initial))
    raise(Errc::invalid_argument,
          "coupled problems must share the initial segment");
}

struct PairWorkspace {
  BrownianPath path;
  SolutionPath x1, x2;
};

}  // namespace

bool is_censored(double error, double std_err) {
  return !(error > 0.0) || error < 2.0 * std_err;
}

RateFit fit_rate(std::span<const double> levels,
                 std::span<const double> errors) {
  if (levels.size() != errors.size())
    raise(Errc::invalid_argument, "levels and errors differ in length");
  if (levels.size() < 3)
    raise(Errc::invalid_argument, "rate fits need at least 3 levels");
  const std::size_t n = levels.size();
  std::vector<double> lx(n), ly(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(levels[i] > 0.0))
      raise(Errc::invalid_argument, "rate fit levels must be positive");
    if (!(errors[i] > 0.0))
      raise(Errc::invalid_argument,
            "rate fit errors must be positive; drop censored levels first");
    lx[i] = std::log(levels[i]);
    ly[i] = std::log(errors[i]);
  }
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= double(n);
  my /= double(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += square(lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
    syy += square(ly[i] - my);
  }
  if (sxx == 0.0)
    raise(Errc::invalid_argument, "rate fit levels must be distinct");
  RateFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy > 0.0) {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      ss_res += square(ly[i] - (fit.intercept + fit.slope * lx[i]));
    fit.r_squared = 1.0 - ss_res / syy;
  } else {
    fit.r_squared = 1.0;  // all errors equal: the flat line fits exactly
  }
  fit.levels.assign(levels.begin(), levels.end());
  return fit;
}

ErrorEstimate strong_error(const DelaySdeProblem& first,
                           const DelaySdeProblem& second,
                           std::optional<double> t, const McOptions& opts) {
  require_coupled(first, second);
  if (opts.paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  const TimeMesh mesh(first.horizon, opts.steps);
  delay_lag(first, mesh);
  delay_lag(second, mesh);
  const std::int64_t t_index = t ? mesh.aligned_index(*t) : -1;

  std::vector<double> rows;
  run_paths(
      opts.paths, opts.seed, 0, opts.workers, 1,
      [&](std::int64_t, std::uint64_t seed, double* out) {
        thread_local PairWorkspace ws;
        sample_brownian_into(mesh, seed, ws.path);
        solve_euler_delay_into(first, ws.path, ws.x1);
        solve_euler_delay_into(second, ws.path, ws.x2);
        if (t_index >= 0) {
          out[0] = square(ws.x1.values[std::size_t(t_index)] -
                          ws.x2.values[std::size_t(t_index)]);
        } else {
          double sup = 0.0;
          for (std::size_t i = 0; i < ws.x1.values.size(); ++i)
            sup = std::max(sup, square(ws.x1.values[i] - ws.x2.values[i]));
          out[0] = sup;
        }
      },
      rows);
  const Estimate est = mean_estimate(rows);
  ErrorEstimate out;
  out.value = est.value;
  out.std_err = est.std_err;
  out.paths = opts.paths;
  out.kind = t ? ErrorKind::strong_l2 : ErrorKind::strong_sup_l2;
  out.level = std::abs(first.delay - second.delay);
  return out;
}

ErrorEstimate weak_error(const DelaySdeProblem& first,
                         const DelaySdeProblem& second, const TestFunction& g,
                         double t, const McOptions& opts, bool coupled) {
  // Weak comparisons only need a common horizon: comparing against a shifted
  // or otherwise different law is legitimate, unlike pathwise strong errors.
  if (first.horizon != second.horizon)
    raise(Errc::invalid_argument, "compared problems must share the horizon");
  if (opts.paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  const TimeMesh mesh(first.horizon, opts.steps);
  delay_lag(first, mesh);
  delay_lag(second, mesh);
  const std::int64_t t_index = mesh.aligned_index(t);

  ErrorEstimate out;
  out.paths = opts.paths;
  out.kind = ErrorKind::weak;
  out.level = std::abs(first.delay - second.delay);
  if (coupled) {
    std::vector<double> rows;
    run_paths(
        opts.paths, opts.seed, 0, opts.workers, 1,
        [&](std::int64_t, std::uint64_t seed, double* row) {
          thread_local PairWorkspace ws;
          sample_brownian_into(mesh, seed, ws.path);
          solve_euler_delay_into(first, ws.path, ws.x1);
          solve_euler_delay_into(second, ws.path, ws.x2);
          row[0] = g(ws.x1.values[std::size_t(t_index)]) -
                   g(ws.x2.values[std::size_t(t_index)]);
        },
        rows);
    const Estimate est = mean_estimate(rows);
    out.value = std::abs(est.value);
    out.std_err = est.std_err;
  } else {
    auto one = [&](const DelaySdeProblem& problem, std::uint64_t stream) {
      std::vector<double> rows;
      run_paths(
          opts.paths, opts.seed, stream, opts.workers, 1,
          [&](std::int64_t, std::uint64_t seed, double* row) {
            thread_local PairWorkspace ws;
            sample_brownian_into(mesh, seed, ws.path);
            solve_euler_delay_into(problem, ws.path, ws.x1);
            row[0] = g(ws.x1.values[std::size_t(t_index)]);
          },
          rows);
      return mean_estimate(rows);
    };
    const Estimate a = one(first, 1);
    const Estimate b = one(second, 2);
    out.value = std::abs(a.value - b.value);
    out.std_err = std::sqrt(square(a.std_err) + square(b.std_err));
  }
  return out;
}

namespace {

// Rows from per-level estimates; strong tables report the RMS.
LevelRow make_row(double level, const Estimate& est, std::int64_t paths,
                  bool strong) {
  LevelRow row;
  row.level = level;
  row.paths = paths;
  if (strong) {
    const double mean_sq = std::max(0.0, est.value);
    row.error = std::sqrt(mean_sq);
    row.std_err = row.error > 0.0 ? est.std_err / (2.0 * row.error) : 0.0;
  } else {
    row.error = std::abs(est.value);
    row.std_err = est.std_err;
  }
  row.censored = is_censored(row.error, row.std_err);
  return row;
}

std::optional<RateFit> fit_uncensored(const std::vector<LevelRow>& rows) {
  std::vector<double> levels, errors;
  for (const auto& row : rows) {
    if (!row.censored) {
      levels.push_back(row.level);
      errors.push_back(row.error);
    }
  }
  if (levels.size() < 3) return std::nullopt;
  return fit_rate(levels, errors);
}

}  // namespace

RateTable caratheodory_rate_experiment(const DelaySdeProblem& base,
                                       std::span<const std::int64_t> levels,
                                       const McOptions& opts,
                                       const TestFunction* g) {
  if (levels.empty()) raise(Errc::invalid_argument, "need at least one level");
  if (opts.paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  if (g) {
    if (base.sigma_lower <= 0.0)
      raise(Errc::ellipticity,
            "the weak Caratheodory experiment needs sigma0 > 0");
    if (g->bound > 1.0 + 1e-12)
      raise(Errc::validation, "test function bound must not exceed 1");
  }
  const TimeMesh mesh(base.horizon, opts.steps);
  std::vector<DelaySdeProblem> approximants;
  approximants.reserve(levels.size());
  for (const std::int64_t n : levels) {
    if (n < 1) raise(Errc::invalid_argument, "levels must be positive integers");
    DelaySdeProblem approx = build_caratheodory_problem(base, n);
    try {
      delay_lag(approx, mesh);
    } catch (const Error&) {
      std::ostringstream os;
      os << "level n=" << n << " misaligned: lag 1/" << n
         << " is not an integer multiple of the mesh step " << mesh.step();
      raise(Errc::alignment, os.str());
    }
    approximants.push_back(std::move(approx));
  }

  const std::size_t width = levels.size();
  std::vector<double> rows_buf;
  run_paths(
      opts.paths, opts.seed, 0, opts.workers, width,
      [&](std::int64_t, std::uint64_t seed, double* out) {
        thread_local PairWorkspace ws;
        sample_brownian_into(mesh, seed, ws.path);
        solve_euler_delay_into(base, ws.path, ws.x1);
        for (std::size_t k = 0; k < width; ++k) {
          solve_euler_delay_into(approximants[k], ws.path, ws.x2);
          if (g) {
            out[k] = (*g)(ws.x2.values.back()) - (*g)(ws.x1.values.back());
          } else {
            double sup = 0.0;
            for (std::size_t i = 0; i < ws.x1.values.size(); ++i)
              sup = std::max(sup, square(ws.x2.values[i] - ws.x1.values[i]));
            out[k] = sup;
          }
        }
      },
      rows_buf);

  RateTable table;
  table.rows.reserve(width);
  for (std::size_t k = 0; k < width; ++k)
    table.rows.push_back(make_row(double(levels[k]),
                                  column_estimate(rows_buf, width, k),
                                  opts.paths, g == nullptr));
  table.fit = fit_uncensored(table.rows);
  return table;
}

RateTable delay_continuity_experiment(const DelaySdeProblem& family,
                                      std::span<const double> gaps,
                                      const TestFunction& g,
                                      const McOptions& opts) {
  if (gaps.empty()) raise(Errc::invalid_argument, "need at least one gap");
  if (opts.paths < 1) raise(Errc::invalid_argument, "path count must be >= 1");
  if (family.sigma_lower <= 0.0)
    raise(Errc::ellipticity,
          "the delay-continuity experiment needs sigma0 > 0");
  if (g.bound > 1.0 + 1e-12)
    raise(Errc::validation, "test function bound must not exceed 1");
  const TimeMesh mesh(family.horizon, opts.steps);
  delay_lag(family, mesh);
  std::vector<DelaySdeProblem> shifted;
  shifted.reserve(gaps.size());
  for (const double gap : gaps) {
    if (gap < 0.0) raise(Errc::invalid_argument, "gaps must be nonnegative");
    DelaySdeProblem p = family;
    p.delay = family.delay + gap;
    try {
      delay_lag(p, mesh);
    } catch (const Error&) {
      std::ostringstream os;
      os << "gap=" << gap << " misaligned: tau1+gap is not an integer "
         << "multiple of the mesh step " << mesh.step();
      raise(Errc::alignment, os.str());
    }
    shifted.push_back(std::move(p));
  }

  const std::size_t width = gaps.size();
  std::vector<double> rows_buf;
  run_paths(
      opts.paths, opts.seed, 0, opts.workers, width,
      [&](std::int64_t, std::uint64_t seed, double* out) {
        thread_local PairWorkspace ws;
        sample_brownian_into(mesh, seed, ws.path);
        solve_euler_delay_into(family, ws.path, ws.x1);
        for (std::size_t k = 0; k < width; ++k) {
          solve_euler_delay_into(shifted[k], ws.path, ws.x2);
          out[k] = g(ws.x2.values.back()) - g(ws.x1.values.back());
        }
      },
      rows_buf);

  RateTable table;
  table.rows.reserve(width);
  for (std::size_t k = 0; k < width; ++k)
    table.rows.push_back(make_row(gaps[k], column_estimate(rows_buf, width, k),
                                  opts.paths, false));
  table.fit = fit_uncensored(table.rows);
  return table;
}

}  // namespace delaylab
