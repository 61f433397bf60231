#include "core/config.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "core/malliavin.hpp"

namespace delaylab {
namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& what) {
  raise(Errc::validation, field + ": " + what);
}

const json& member(const json& obj, const std::string& parent,
                   const std::string& key) {
  if (!obj.contains(key)) bad(parent + "." + key, "required field is missing");
  return obj.at(key);
}

void reject_unknown(const json& obj, const std::string& parent,
                    std::initializer_list<const char*> allowed) {
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* key : allowed) known = known || item.key() == key;
    if (!known) bad(parent + "." + item.key(), "unknown field");
  }
}

double number_field(const json& obj, const std::string& parent,
                    const std::string& key) {
  const json& v = member(obj, parent, key);
  if (!v.is_number()) bad(parent + "." + key, "must be a number");
  return v.get<double>();
}

std::int64_t integer_field(const json& obj, const std::string& parent,
                           const std::string& key) {
  const json& v = member(obj, parent, key);
  if (!v.is_number_integer() && !v.is_number_unsigned())
    bad(parent + "." + key, "must be an integer");
  return v.get<std::int64_t>();
}

std::string string_field(const json& obj, const std::string& parent,
                         const std::string& key) {
  const json& v = member(obj, parent, key);
  if (!v.is_string()) bad(parent + "." + key, "must be a string");
  return v.get<std::string>();
}

}  // namespace

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::strong_rate: return "strong_rate";
    case ExperimentKind::weak_rate: return "weak_rate";
    case ExperimentKind::delay_continuity: return "delay_continuity";
    case ExperimentKind::malliavin_check: return "malliavin_check";
    case ExperimentKind::bound_check: return "bound_check";
  }
  return "unknown";
}

TestFunction TestFunctionSpec::build() const {
  if (kind == "indicator") return TestFunction::indicator(param);
  if (kind == "sign") return TestFunction::sign(param);
  if (kind == "sine") return TestFunction::sine(param);
  raise(Errc::validation,
        "experiment.test_function.kind: must be indicator, sign or sine");
}

DelaySdeProblem ExperimentConfig::build_problem() const {
  return catalog_problem(problem_name, problem_params, tau, horizon, phi);
}

ExperimentConfig parse_config(const json& doc) {
  if (!doc.is_object()) bad("config", "must be a JSON object");
  reject_unknown(doc, "config", {"problem", "experiment", "output"});
  ExperimentConfig cfg;

  const json& problem = member(doc, "config", "problem");
  if (!problem.is_object()) bad("problem", "must be an object");
  reject_unknown(problem, "problem", {"name", "params", "tau", "T", "phi"});
  cfg.problem_name = string_field(problem, "problem", "name");
  if (problem.contains("params")) {
    const json& params = problem.at("params");
    if (!params.is_object()) bad("problem.params", "must be an object");
    for (const auto& item : params.items()) {
      if (!item.value().is_number())
        bad("problem.params." + item.key(), "must be a number");
      cfg.problem_params[item.key()] = item.value().get<double>();
    }
  }
  cfg.tau = number_field(problem, "problem", "tau");
  if (cfg.tau < 0.0) bad("problem.tau", "must be nonnegative");
  cfg.horizon = number_field(problem, "problem", "T");
  if (!(cfg.horizon > 0.0)) bad("problem.T", "must be positive");

  const json& phi = member(problem, "problem", "phi");
  if (!phi.is_object()) bad("problem.phi", "must be an object");
  const std::string phi_kind = string_field(phi, "problem.phi", "kind");
  const double x0 = number_field(phi, "problem.phi", "x0");
  if (phi_kind == "constant") {
    reject_unknown(phi, "problem.phi", {"kind", "x0"});
    cfg.phi = InitialSegment::constant(x0);
  } else if (phi_kind == "holder") {
    reject_unknown(phi, "problem.phi", {"kind", "x0", "c", "beta"});
    const double c = number_field(phi, "problem.phi", "c");
    const double beta = number_field(phi, "problem.phi", "beta");
    if (c < 0.0) bad("problem.phi.c", "must be nonnegative");
    if (!(beta > 0.0) || beta > 1.0) bad("problem.phi.beta", "must lie in (0,1]");
    cfg.phi = InitialSegment::power_holder(x0, c, beta);
  } else {
    bad("problem.phi.kind", "must be 'constant' or 'holder'");
  }

  const json& experiment = member(doc, "config", "experiment");
  if (!experiment.is_object()) bad("experiment", "must be an object");
  reject_unknown(experiment, "experiment",
                 {"kind", "levels", "paths", "fine_steps", "seed",
                  "test_function"});
  const std::string kind = string_field(experiment, "experiment", "kind");
  if (kind == "strong_rate") cfg.kind = ExperimentKind::strong_rate;
  else if (kind == "weak_rate") cfg.kind = ExperimentKind::weak_rate;
  else if (kind == "delay_continuity") cfg.kind = ExperimentKind::delay_continuity;
  else if (kind == "malliavin_check") cfg.kind = ExperimentKind::malliavin_check;
  else if (kind == "bound_check") cfg.kind = ExperimentKind::bound_check;
  else bad("experiment.kind", "unknown experiment kind '" + kind + "'");

  const json& levels = member(experiment, "experiment", "levels");
  if (!levels.is_array() || levels.empty())
    bad("experiment.levels", "must be a nonempty array of numbers");
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const json& v = levels.at(i);
    if (!v.is_number())
      bad("experiment.levels[" + std::to_string(i) + "]", "must be a number");
    cfg.levels.push_back(v.get<double>());
  }

  cfg.paths = integer_field(experiment, "experiment", "paths");
  if (cfg.paths < 1) bad("experiment.paths", "must be at least 1");
  cfg.fine_steps = integer_field(experiment, "experiment", "fine_steps");
  if (cfg.fine_steps < 1) bad("experiment.fine_steps", "must be at least 1");
  const std::int64_t seed = integer_field(experiment, "experiment", "seed");
  if (seed < 0) bad("experiment.seed", "must be nonnegative");
  cfg.seed = std::uint64_t(seed);

  const bool needs_g = cfg.kind == ExperimentKind::weak_rate ||
                       cfg.kind == ExperimentKind::delay_continuity ||
                       cfg.kind == ExperimentKind::bound_check;
  if (experiment.contains("test_function")) {
    if (!needs_g)
      bad("experiment.test_function",
          std::string("not allowed for kind '") + experiment_kind_name(cfg.kind) +
              "'");
    const json& tf = experiment.at("test_function");
    if (!tf.is_object()) bad("experiment.test_function", "must be an object");
    reject_unknown(tf, "experiment.test_function", {"kind", "K"});
    TestFunctionSpec spec;
    spec.kind = string_field(tf, "experiment.test_function", "kind");
    if (spec.kind != "indicator" && spec.kind != "sign" && spec.kind != "sine")
      bad("experiment.test_function.kind", "must be indicator, sign or sine");
    spec.param = number_field(tf, "experiment.test_function", "K");
    cfg.test_function = spec;
  } else if (needs_g) {
    bad("experiment.test_function",
        std::string("required for kind '") + experiment_kind_name(cfg.kind) +
            "'");
  }

  // Rate levels must be positive integers for the lag experiments.
  if (cfg.kind == ExperimentKind::strong_rate ||
      cfg.kind == ExperimentKind::weak_rate) {
    for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
      const double v = cfg.levels[i];
      if (!(v >= 1.0) || v != std::floor(v))
        bad("experiment.levels[" + std::to_string(i) + "]",
            "must be a positive integer n");
    }
  }

  cfg.output = string_field(doc, "config", "output");
  if (cfg.output.empty()) bad("output", "must be a nonempty path");
  return cfg;
}

ExperimentConfig parse_config_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    raise(Errc::validation, std::string("config is not valid JSON: ") + e.what());
  }
  return parse_config(doc);
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::io, "cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str());
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

json row_json(const LevelRow& row) {
  return json{{"level", row.level},
              {"error", row.error},
              {"stderr", row.std_err},
              {"paths", row.paths},
              {"censored", row.censored}};
}

json fit_json(const std::optional<RateFit>& fit) {
  if (!fit) return nullptr;
  return json{{"slope", fit->slope},
              {"intercept", fit->intercept},
              {"r_squared", fit->r_squared},
              {"levels_used", fit->levels}};
}

json estimate_json(const Estimate& e) {
  return json{{"value", e.value}, {"stderr", e.std_err}};
}

json config_json(const ExperimentConfig& cfg) {
  json phi{{"kind", cfg.phi.kind == InitialSegment::Kind::constant
                        ? "constant"
                        : "holder"},
           {"x0", cfg.phi.x0}};
  if (cfg.phi.kind == InitialSegment::Kind::power_holder) {
    phi["c"] = cfg.phi.c;
    phi["beta"] = cfg.phi.beta;
  }
  json out{{"problem",
            {{"name", cfg.problem_name},
             {"params", cfg.problem_params},
             {"tau", cfg.tau},
             {"T", cfg.horizon},
             {"phi", phi}}},
           {"kind", experiment_kind_name(cfg.kind)},
           {"levels", cfg.levels},
           {"paths", cfg.paths},
           {"fine_steps", cfg.fine_steps},
           {"seed", cfg.seed}};
  if (cfg.test_function)
    out["test_function"] =
        json{{"kind", cfg.test_function->kind}, {"K", cfg.test_function->param}};
  return out;
}

// Largest divisor of `steps` not exceeding `cap`; keeps the derivative grid
// aligned to the mesh for any step count.
std::int64_t grid_for(std::int64_t steps, std::int64_t cap) {
  for (std::int64_t d = std::min(cap, steps); d > 1; --d)
    if (steps % d == 0) return d;
  return 1;
}

RateTable run_malliavin_check(const ExperimentConfig& cfg,
                              const DelaySdeProblem& problem) {
  RateTable table;
  const std::int64_t grid = grid_for(cfg.fine_steps, kDefaultDerivativeGrid);
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const double t = cfg.levels[i];
    if (!(t > 0.0))
      raise(Errc::validation,
            "experiment.levels[" + std::to_string(i) + "]: t must be positive");
    const Estimate est = inverse_moment(problem, cfg.fine_steps, t, 1,
                                        cfg.paths, grid, cfg.seed);
    LevelRow row;
    row.level = t;
    row.error = est.value;
    row.std_err = est.std_err;
    row.paths = cfg.paths;
    row.censored = is_censored(row.error, row.std_err);
    table.rows.push_back(row);
  }
  std::vector<double> levels, errors;
  for (const auto& row : table.rows)
    if (!row.censored) {
      levels.push_back(row.level);
      errors.push_back(row.error);
    }
  if (levels.size() >= 3) table.fit = fit_rate(levels, errors);
  return table;
}

RateTable run_bound_check(const ExperimentConfig& cfg,
                          const DelaySdeProblem& problem, json& extras) {
  const TestFunction g = cfg.test_function->build();
  RateTable table;
  extras = json::array();
  for (std::size_t i = 0; i < cfg.levels.size(); ++i) {
    const double tau2 = cfg.levels[i];
    if (tau2 < 0.0)
      raise(Errc::validation, "experiment.levels[" + std::to_string(i) +
                                  "]: tau2 must be nonnegative");
    DelaySdeProblem other = problem;
    other.delay = tau2;
    const WeakBoundReport report = weak_bound_report(
        problem, other, g, cfg.fine_steps, cfg.horizon, cfg.paths,
        grid_for(cfg.fine_steps, kBoundCheckGrid), cfg.seed);
    LevelRow row;
    row.level = tau2;
    row.error = report.lhs.value;
    row.std_err = report.lhs.std_err;
    row.paths = cfg.paths;
    row.censored = is_censored(row.error, row.std_err);
    table.rows.push_back(row);
    extras.push_back(json{{"tau2", tau2},
                          {"lhs", estimate_json(report.lhs)},
                          {"term_a", estimate_json(report.term_a)},
                          {"term_b", estimate_json(report.term_b)},
                          {"delta2_bound", estimate_json(report.delta2_bound)},
                          {"mean_sq_diff", estimate_json(report.mean_sq_diff)},
                          {"deriv_sq_diff", estimate_json(report.deriv_sq_diff)},
                          {"inv_norm2", estimate_json(report.inv_norm2)},
                          {"inv_norm8", estimate_json(report.inv_norm8)},
                          {"ddf_sq", estimate_json(report.ddf_sq)},
                          {"inequality_satisfied", report.inequality_satisfied},
                          {"low_confidence", report.low_confidence}});
  }
  return table;
}

}  // namespace

ExperimentReport run_experiment(const ExperimentConfig& config) {
  const DelaySdeProblem problem = config.build_problem();
  ExperimentReport report;
  report.config = config;
  json extras;

  switch (config.kind) {
    case ExperimentKind::strong_rate:
    case ExperimentKind::weak_rate: {
      if (config.tau != 0.0)
        raise(Errc::validation,
              "problem.tau: Caratheodory rate experiments need tau = 0");
      std::vector<std::int64_t> levels;
      for (const double v : config.levels) levels.push_back(std::int64_t(v));
      McOptions opts{config.paths, config.fine_steps, config.seed, 0};
      if (config.kind == ExperimentKind::weak_rate) {
        const TestFunction g = config.test_function->build();
        report.table = caratheodory_rate_experiment(problem, levels, opts, &g);
      } else {
        report.table =
            caratheodory_rate_experiment(problem, levels, opts, nullptr);
      }
      break;
    }
    case ExperimentKind::delay_continuity: {
      const TestFunction g = config.test_function->build();
      McOptions opts{config.paths, config.fine_steps, config.seed, 0};
      report.table =
          delay_continuity_experiment(problem, config.levels, g, opts);
      break;
    }
    case ExperimentKind::malliavin_check:
      report.table = run_malliavin_check(config, problem);
      break;
    case ExperimentKind::bound_check:
      report.table = run_bound_check(config, problem, extras);
      break;
  }

  json rows = json::array();
  for (const auto& row : report.table.rows) rows.push_back(row_json(row));
  report.summary = json{{"version", kVersion},
                        {"experiment", config_json(config)},
                        {"rows", rows},
                        {"rate_fit", fit_json(report.table.fit)}};
  if (!extras.is_null()) report.summary["bound_reports"] = extras;
  return report;
}

std::string format_csv(const RateTable& table) {
  std::string out = "level,error,stderr,paths,censored\n";
  for (const auto& row : table.rows) {
    out += format_double(row.level);
    out += ',';
    out += format_double(row.error);
    out += ',';
    out += format_double(row.std_err);
    out += ',';
    out += std::to_string(row.paths);
    out += ',';
    out += row.censored ? '1' : '0';
    out += '\n';
  }
  return out;
}

void write_report(const ExperimentReport& report, const std::string& dir) {
  const std::string target = dir.empty() ? report.config.output : dir;
  std::error_code ec;
  std::filesystem::create_directories(target, ec);
  if (ec)
    raise(Errc::io, "cannot create output directory '" + target + "': " +
                        ec.message());
  const auto csv_path = std::filesystem::path(target) / "report.csv";
  const auto json_path = std::filesystem::path(target) / "report.json";
  {
    std::ofstream out(csv_path, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write '" + csv_path.string() + "'");
    out << format_csv(report.table);
  }
  {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) raise(Errc::io, "cannot write '" + json_path.string() + "'");
    nlohmann::json summary = report.summary;
    summary["output_dir"] = target;
    out << summary.dump(2) << '\n';
  }
}

}  // namespace delaylab
