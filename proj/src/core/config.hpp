#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/estimator.hpp"
#include "core/model.hpp"

namespace delaylab {

enum class ExperimentKind {
  strong_rate,
  weak_rate,
  delay_continuity,
  malliavin_check,
  bound_check,
};

const char* experiment_kind_name(ExperimentKind kind);

struct TestFunctionSpec {
  std::string kind;  // indicator | sign | sine
  double param = 0.0;
  TestFunction build() const;
};

// Validated experiment configuration. The JSON schema is strict: a missing
// required field or an unknown key anywhere rejects the config before any
// computation starts, and every error message names the offending field.
struct ExperimentConfig {
  std::string problem_name;
  std::map<std::string, double> problem_params;
  double tau = 0.0;
  double horizon = 1.0;
  InitialSegment phi;
  ExperimentKind kind = ExperimentKind::strong_rate;
  std::vector<double> levels;
  std::int64_t paths = 0;
  std::int64_t fine_steps = 0;
  std::uint64_t seed = 0;
  std::optional<TestFunctionSpec> test_function;
  std::string output;

  DelaySdeProblem build_problem() const;
};

ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config_file(const std::string& path);

struct ExperimentReport {
  ExperimentConfig config;
  RateTable table;
  nlohmann::json summary;  // machine-readable mirror of table + extras
};

// Runs the configured experiment. Grid sizes not present in the schema use
// the module defaults (first variation 64, weak bound 32).
ExperimentReport run_experiment(const ExperimentConfig& config);

// CSV contract: header `level,error,stderr,paths,censored`, floating values
// with 17 significant digits; byte-identical for identical config and seed.
std::string format_csv(const RateTable& table);

// Writes <dir>/report.csv and <dir>/report.json; `dir` overrides the
// config's output path when nonempty.
void write_report(const ExperimentReport& report, const std::string& dir);

inline constexpr std::int64_t kDefaultDerivativeGrid = 64;
inline constexpr std::int64_t kBoundCheckGrid = 32;

}  // namespace delaylab
