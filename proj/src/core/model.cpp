#include "core/model.hpp"

#include <cmath>
#include <sstream>

#include "core/rng.hpp"

namespace delaylab {
namespace {

CoefficientField::Fn zero_fn() {
  return [](double, double, double) { return 0.0; };
}

CoefficientField::Fn const_fn(double v) {
  return [v](double, double, double) { return v; };
}

CoefficientField constant_field(double v) {
  CoefficientField f;
  f.value = const_fn(v);
  f.dx = zero_fn();
  f.dy = zero_fn();
  f.dxx = zero_fn();
  f.dxy = zero_fn();
  f.dyy = zero_fn();
  f.lipschitz = 0.0;
  f.depends_on_y = false;
  return f;
}

}  // namespace

TimeMesh::TimeMesh(double horizon, std::int64_t steps)
    : horizon_(horizon), steps_(steps), step_(horizon / double(steps)) {
  if (!(horizon > 0.0)) raise(Errc::invalid_argument, "mesh horizon must be positive");
  if (steps < 1) raise(Errc::invalid_argument, "mesh step count must be at least 1");
}

std::int64_t TimeMesh::aligned_index(double time, double tol) const {
  const double ratio = time / step_;
  const double rounded = std::nearbyint(ratio);
  if (std::abs(ratio - rounded) > tol) {
    std::ostringstream os;
    os << "time " << time << " is not aligned to the mesh (step " << step_
       << "); refine the mesh instead of interpolating";
    raise(Errc::alignment, os.str());
  }
  const auto idx = std::int64_t(rounded);
  if (idx < 0 || idx > steps_) {
    std::ostringstream os;
    os << "time " << time << " lies outside [0," << horizon_ << "]";
    raise(Errc::invalid_argument, os.str());
  }
  return idx;
}

void sample_brownian_into(const TimeMesh& mesh, std::uint64_t seed,
                          BrownianPath& out) {
  const std::int64_t n = mesh.steps();
  out.mesh = mesh;
  out.seed = seed;
  out.increments.resize(std::size_t(n));
  out.nodes.resize(std::size_t(n) + 1);
  const double root_h = std::sqrt(mesh.step());
  out.nodes[0] = 0.0;
  for (std::int64_t i = 0; i < n; ++i) {
    const double dz = root_h * rng::standard_normal(seed, std::uint64_t(i));
    out.increments[std::size_t(i)] = dz;
    out.nodes[std::size_t(i) + 1] = out.nodes[std::size_t(i)] + dz;
  }
}

BrownianPath sample_brownian(const TimeMesh& mesh, std::uint64_t seed) {
  BrownianPath path;
  sample_brownian_into(mesh, seed, path);
  return path;
}

BrownianPath coarsen_path(const BrownianPath& path, std::int64_t factor) {
  const std::int64_t n = path.mesh.steps();
  if (factor < 1 || n % factor != 0) {
    std::ostringstream os;
    os << "coarsening factor " << factor << " does not divide step count " << n;
    raise(Errc::invalid_argument, os.str());
  }
  if (factor == 1) return path;
  BrownianPath out;
  const std::int64_t m = n / factor;
  out.mesh = TimeMesh(path.mesh.horizon(), m);
  out.seed = path.seed;
  out.nodes.resize(std::size_t(m) + 1);
  out.increments.resize(std::size_t(m));
  for (std::int64_t k = 0; k <= m; ++k)
    out.nodes[std::size_t(k)] = path.nodes[std::size_t(k * factor)];
  for (std::int64_t k = 0; k < m; ++k)
    out.increments[std::size_t(k)] =
        out.nodes[std::size_t(k) + 1] - out.nodes[std::size_t(k)];
  return out;
}

InitialSegment InitialSegment::constant(double x0) {
  InitialSegment s;
  s.kind = Kind::constant;
  s.x0 = x0;
  return s;
}

InitialSegment InitialSegment::power_holder(double x0, double c, double beta) {
  if (!(beta > 0.0) || beta > 1.0)
    raise(Errc::invalid_argument, "Hölder exponent beta must lie in (0,1]");
  if (c < 0.0) raise(Errc::invalid_argument, "Hölder constant c must be nonnegative");
  InitialSegment s;
  s.kind = Kind::power_holder;
  s.x0 = x0;
  s.c = c;
  s.beta = beta;
  return s;
}

double InitialSegment::operator()(double t) const {
  if (kind == Kind::constant) return x0;
  return t < 0.0 ? x0 + c * std::pow(-t, beta) : x0;
}

void validate_problem(const DelaySdeProblem& problem) {
  if (problem.delay < 0.0)
    raise(Errc::validation, "problem.tau must be nonnegative");
  if (!(problem.horizon > 0.0))
    raise(Errc::validation, "problem.T must be positive");
  if (problem.sigma_lower < 0.0)
    raise(Errc::validation, "problem.sigma_lower must be nonnegative");
  if (problem.sigma_lower > 0.0) {
    // Ellipticity spot check at quasi-random points of [0,T] x [-8,8]^2.
    constexpr std::uint64_t kSeed = 0xE111B71Cu;
    for (int i = 0; i < 128; ++i) {
      const double t = problem.horizon * rng::uniform01(kSeed, 3 * i);
      const double x = 16.0 * rng::uniform01(kSeed, 3 * i + 1) - 8.0;
      const double y = 16.0 * rng::uniform01(kSeed, 3 * i + 2) - 8.0;
      if (std::abs(problem.diffusion.value(t, x, y)) <
          problem.sigma_lower * (1.0 - 1e-12)) {
        std::ostringstream os;
        os << "declared sigma lower bound " << problem.sigma_lower
           << " violated at (t,x,y)=(" << t << "," << x << "," << y << ")";
        raise(Errc::validation, os.str());
      }
    }
  }
}

TestFunction TestFunction::indicator(double threshold) {
  TestFunction g;
  g.kind = Kind::indicator;
  g.param = threshold;
  g.bound = 1.0;
  g.fn = [threshold](double x) { return x <= threshold ? 1.0 : 0.0; };
  return g;
}

TestFunction TestFunction::sign(double center) {
  TestFunction g;
  g.kind = Kind::sign;
  g.param = center;
  g.bound = 1.0;
  g.fn = [center](double x) {
    return x > center ? 1.0 : (x < center ? -1.0 : 0.0);
  };
  return g;
}

TestFunction TestFunction::sine(double frequency) {
  TestFunction g;
  g.kind = Kind::sine;
  g.param = frequency;
  g.bound = 1.0;
  g.fn = [frequency](double x) { return std::sin(frequency * x); };
  return g;
}

TestFunction TestFunction::custom(std::function<double(double)> fn,
                                  double bound) {
  TestFunction g;
  g.kind = Kind::custom;
  g.bound = bound;
  g.fn = std::move(fn);
  return g;
}

namespace {

void require_params(const std::string& name,
                    const std::map<std::string, double>& params,
                    const std::vector<std::string>& expected) {
  for (const auto& [key, _] : params) {
    bool known = false;
    for (const auto& e : expected) known = known || key == e;
    if (!known)
      raise(Errc::validation,
            "problem '" + name + "': unknown parameter '" + key + "'");
  }
  for (const auto& e : expected) {
    if (!params.count(e))
      raise(Errc::validation,
            "problem '" + name + "': missing parameter '" + e + "'");
  }
}

DelaySdeProblem make_pure_noise() {
  DelaySdeProblem p;
  p.name = "pure_noise";
  p.drift = constant_field(0.0);
  p.diffusion = constant_field(1.0);
  p.sigma_lower = 1.0;
  return p;
}

DelaySdeProblem make_delayed_drift_ode() {
  DelaySdeProblem p;
  p.name = "delayed_drift_ode";
  p.drift = constant_field(0.0);
  p.drift.value = [](double, double, double y) { return y; };
  p.drift.dy = const_fn(1.0);
  p.drift.lipschitz = 1.0;
  p.drift.depends_on_y = true;
  p.diffusion = constant_field(0.0);
  p.sigma_lower = 0.0;
  return p;
}

DelaySdeProblem make_linear_additive(double a, double sigma0) {
  DelaySdeProblem p;
  p.name = "linear_additive";
  p.drift = constant_field(0.0);
  p.drift.value = [a](double, double x, double) { return a * x; };
  p.drift.dx = const_fn(a);
  p.drift.lipschitz = std::abs(a);
  p.diffusion = constant_field(sigma0);
  p.sigma_lower = sigma0;
  return p;
}

DelaySdeProblem make_linear_delay(double alpha, double beta, double sigma0) {
  DelaySdeProblem p;
  p.name = "linear_delay";
  p.drift = constant_field(0.0);
  p.drift.value = [alpha, beta](double, double x, double y) {
    return alpha * x + beta * y;
  };
  p.drift.dx = const_fn(alpha);
  p.drift.dy = const_fn(beta);
  p.drift.lipschitz = std::max(std::abs(alpha), std::abs(beta));
  p.drift.depends_on_y = true;
  p.diffusion = constant_field(sigma0);
  p.sigma_lower = sigma0;
  return p;
}

DelaySdeProblem make_trig() {
  DelaySdeProblem p;
  p.name = "trig";
  CoefficientField b;
  b.value = [](double, double x, double y) { return std::sin(x) + std::cos(y); };
  b.dx = [](double, double x, double) { return std::cos(x); };
  b.dy = [](double, double, double y) { return -std::sin(y); };
  b.dxx = [](double, double x, double) { return -std::sin(x); };
  b.dxy = zero_fn();
  b.dyy = [](double, double, double y) { return -std::cos(y); };
  b.lipschitz = 1.0;
  b.depends_on_y = true;
  CoefficientField s;
  s.value = [](double, double x, double y) { return 1.0 + 0.5 * std::cos(x + y); };
  s.dx = [](double, double x, double y) { return -0.5 * std::sin(x + y); };
  s.dy = s.dx;
  s.dxx = [](double, double x, double y) { return -0.5 * std::cos(x + y); };
  s.dxy = s.dxx;
  s.dyy = s.dxx;
  s.lipschitz = 0.5;
  s.depends_on_y = true;
  p.drift = b;
  p.diffusion = s;
  p.sigma_lower = 0.5;
  return p;
}

DelaySdeProblem make_trig_nodelay() {
  DelaySdeProblem p;
  p.name = "trig_nodelay";
  CoefficientField b;
  b.value = [](double, double x, double) { return std::sin(x); };
  b.dx = [](double, double x, double) { return std::cos(x); };
  b.dy = zero_fn();
  b.dxx = [](double, double x, double) { return -std::sin(x); };
  b.dxy = zero_fn();
  b.dyy = zero_fn();
  b.lipschitz = 1.0;
  b.depends_on_y = false;
  CoefficientField s;
  s.value = [](double, double x, double) { return 1.0 + 0.5 * std::cos(x); };
  s.dx = [](double, double x, double) { return -0.5 * std::sin(x); };
  s.dy = zero_fn();
  s.dxx = [](double, double x, double) { return -0.5 * std::cos(x); };
  s.dxy = zero_fn();
  s.dyy = zero_fn();
  s.lipschitz = 0.5;
  s.depends_on_y = false;
  p.drift = b;
  p.diffusion = s;
  p.sigma_lower = 0.5;
  return p;
}

}  // namespace

DelaySdeProblem catalog_problem(const std::string& name,
                                const std::map<std::string, double>& params,
                                double tau, double horizon,
                                const InitialSegment& phi) {
  DelaySdeProblem p;
  if (name == "pure_noise") {
    require_params(name, params, {});
    p = make_pure_noise();
  } else if (name == "delayed_drift_ode") {
    require_params(name, params, {});
    p = make_delayed_drift_ode();
  } else if (name == "linear_additive") {
    require_params(name, params, {"a", "sigma0"});
    if (params.at("sigma0") < 0.0)
      raise(Errc::validation, "linear_additive: sigma0 must be nonnegative");
    p = make_linear_additive(params.at("a"), params.at("sigma0"));
  } else if (name == "linear_delay") {
    require_params(name, params, {"alpha", "beta", "sigma0"});
    if (params.at("sigma0") < 0.0)
      raise(Errc::validation, "linear_delay: sigma0 must be nonnegative");
    p = make_linear_delay(params.at("alpha"), params.at("beta"),
                          params.at("sigma0"));
  } else if (name == "trig") {
    require_params(name, params, {});
    p = make_trig();
  } else if (name == "trig_nodelay") {
    require_params(name, params, {});
    p = make_trig_nodelay();
  } else {
    raise(Errc::not_found, "unknown catalog problem '" + name + "'");
  }
  p.delay = tau;
  p.horizon = horizon;
  p.initial = phi;
  validate_problem(p);
  return p;
}

std::vector<std::string> catalog_names() {
  return {"pure_noise", "delayed_drift_ode", "linear_additive",
          "linear_delay", "trig", "trig_nodelay"};
}

std::string catalog_describe(const std::string& name) {
  std::ostringstream os;
  if (name == "pure_noise") {
    os << "pure_noise\n"
       << "  b(t,x,y) = 0\n"
       << "  sigma(t,x,y) = 1\n"
       << "  params: (none)\n"
       << "  sigma0 = 1, L = 0\n"
       << "  delay-dependent coefficients: no (valid Caratheodory base)\n";
  } else if (name == "delayed_drift_ode") {
    os << "delayed_drift_ode\n"
       << "  b(t,x,y) = y\n"
       << "  sigma(t,x,y) = 0\n"
       << "  params: (none)\n"
       << "  sigma0 = 0, L = 1\n"
       << "  deterministic; rejected by estimators that require ellipticity\n";
  } else if (name == "linear_additive") {
    os << "linear_additive\n"
       << "  b(t,x,y) = a*x\n"
       << "  sigma(t,x,y) = sigma0\n"
       << "  params: a, sigma0\n"
       << "  sigma0 = sigma0, L = |a|\n"
       << "  delay-dependent coefficients: no (valid Caratheodory base)\n";
  } else if (name == "linear_delay") {
    os << "linear_delay\n"
       << "  b(t,x,y) = alpha*x + beta*y\n"
       << "  sigma(t,x,y) = sigma0\n"
       << "  params: alpha, beta, sigma0\n"
       << "  sigma0 = sigma0, L = max(|alpha|,|beta|)\n";
  } else if (name == "trig") {
    os << "trig\n"
       << "  b(t,x,y) = sin(x) + cos(y)\n"
       << "  sigma(t,x,y) = 1 + 0.5*cos(x+y)\n"
       << "  params: (none)\n"
       << "  sigma0 = 0.5, L = 1, second partials bounded by 1\n";
  } else if (name == "trig_nodelay") {
    os << "trig_nodelay\n"
       << "  b(t,x,y) = sin(x)\n"
       << "  sigma(t,x,y) = 1 + 0.5*cos(x)\n"
       << "  params: (none)\n"
       << "  sigma0 = 0.5, L = 1, second partials bounded by 1\n"
       << "  delay-dependent coefficients: no (valid Caratheodory base)\n";
  } else {
    raise(Errc::not_found, "unknown catalog problem '" + name + "'");
  }
  return os.str();
}

double finite_difference_deviation(const CoefficientField& field,
                                   double horizon, int points,
                                   std::uint64_t seed) {
  if (!field.has_first_partials())
    raise(Errc::capability, "coefficient field lacks first partials");
  double worst = 0.0;
  const double h1 = 6.0e-6;  // first differences
  const double h2 = 2.0e-5;  // differences of analytic first partials
  auto upd = [&worst](double analytic, double numeric) {
    const double dev = std::abs(analytic - numeric) / (1.0 + std::abs(analytic));
    if (dev > worst) worst = dev;
  };
  for (int i = 0; i < points; ++i) {
    const double t = horizon * rng::uniform01(seed, 3 * std::uint64_t(i));
    const double x = 8.0 * rng::uniform01(seed, 3 * std::uint64_t(i) + 1) - 4.0;
    const double y = 8.0 * rng::uniform01(seed, 3 * std::uint64_t(i) + 2) - 4.0;
    const double sx = h1 * (1.0 + std::abs(x));
    const double sy = h1 * (1.0 + std::abs(y));
    upd(field.dx(t, x, y),
        (field.value(t, x + sx, y) - field.value(t, x - sx, y)) / (2.0 * sx));
    upd(field.dy(t, x, y),
        (field.value(t, x, y + sy) - field.value(t, x, y - sy)) / (2.0 * sy));
    if (field.has_second_partials()) {
      const double tx = h2 * (1.0 + std::abs(x));
      const double ty = h2 * (1.0 + std::abs(y));
      upd(field.dxx(t, x, y),
          (field.dx(t, x + tx, y) - field.dx(t, x - tx, y)) / (2.0 * tx));
      upd(field.dxy(t, x, y),
          (field.dx(t, x, y + ty) - field.dx(t, x, y - ty)) / (2.0 * ty));
      upd(field.dyy(t, x, y),
          (field.dy(t, x, y + ty) - field.dy(t, x, y - ty)) / (2.0 * ty));
    }
  }
  return worst;
}

}  // namespace delaylab
