#include "delaylab/delaylab.h"

#include <cstring>
#include <new>
#include <string>

#include "core/config.hpp"
#include "core/errors.hpp"
#include "core/malliavin.hpp"
#include "core/model.hpp"
#include "core/solver.hpp"

namespace {

thread_local std::string g_last_error;

dsl_status to_status(delaylab::Errc code) {
  using delaylab::Errc;
  switch (code) {
    case Errc::invalid_argument: return DSL_ERR_INVALID_ARGUMENT;
    case Errc::not_found: return DSL_ERR_NOT_FOUND;
    case Errc::validation: return DSL_ERR_VALIDATION;
    case Errc::alignment: return DSL_ERR_ALIGNMENT;
    case Errc::ellipticity: return DSL_ERR_ELLIPTICITY;
    case Errc::capability: return DSL_ERR_CAPABILITY;
    case Errc::io: return DSL_ERR_IO;
  }
  return DSL_ERR_INTERNAL;
}

template <typename Fn>
dsl_status guarded(Fn&& fn) {
  try {
    fn();
    return DSL_OK;
  } catch (const delaylab::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DSL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DSL_ERR_INTERNAL;
  }
}

char* duplicate(const std::string& s) {
  char* out = static_cast<char*>(::operator new(s.size() + 1, std::nothrow));
  if (!out) return nullptr;
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

// The "problem" object of the config schema, parsed standalone.
delaylab::DelaySdeProblem problem_from_json(const char* text) {
  if (!text) delaylab::raise(delaylab::Errc::invalid_argument, "problem JSON is null");
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    delaylab::raise(delaylab::Errc::validation,
                    std::string("problem is not valid JSON: ") + e.what());
  }
  nlohmann::json wrapper{
      {"problem", doc},
      {"experiment",
       {{"kind", "strong_rate"},
        {"levels", {1}},
        {"paths", 1},
        {"fine_steps", 1},
        {"seed", 0}}},
      {"output", "unused"}};
  // Reuse the strict config validator for the problem subtree; tau is not
  // restricted here, so bypass the Caratheodory tau==0 rule by construction.
  delaylab::ExperimentConfig cfg = delaylab::parse_config(wrapper);
  return cfg.build_problem();
}

dsl_status run_report(delaylab::ExperimentConfig cfg, const char* output_dir,
                      char** summary_json) {
  const delaylab::ExperimentReport report = delaylab::run_experiment(cfg);
  delaylab::write_report(report, output_dir ? output_dir : "");
  if (summary_json) {
    nlohmann::json summary = report.summary;
    summary["output_dir"] = output_dir ? output_dir : cfg.output;
    *summary_json = duplicate(summary.dump(2));
  }
  return DSL_OK;
}

}  // namespace

struct dsl_problem {
  delaylab::DelaySdeProblem problem;
};

extern "C" {

const char* dsl_version(void) { return delaylab::kVersion; }

int dsl_api_version(void) { return DELAYLAB_API_VERSION; }

const char* dsl_status_name(dsl_status status) {
  switch (status) {
    case DSL_OK: return "ok";
    case DSL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case DSL_ERR_NOT_FOUND: return "not_found";
    case DSL_ERR_VALIDATION: return "validation";
    case DSL_ERR_ALIGNMENT: return "alignment";
    case DSL_ERR_ELLIPTICITY: return "ellipticity";
    case DSL_ERR_CAPABILITY: return "capability";
    case DSL_ERR_IO: return "io";
    case DSL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* dsl_last_error(void) { return g_last_error.c_str(); }

void dsl_string_free(char* s) { ::operator delete(s); }

char* dsl_catalog_list(void) {
  std::string out;
  for (const auto& name : delaylab::catalog_names()) {
    out += name;
    out += '\n';
  }
  return duplicate(out);
}

char* dsl_catalog_describe(const char* name) {
  if (!name) {
    g_last_error = "catalog name is null";
    return nullptr;
  }
  try {
    return duplicate(delaylab::catalog_describe(name));
  } catch (const delaylab::Error& e) {
    g_last_error = e.what();
    return nullptr;
  }
}

dsl_status dsl_problem_create_json(const char* problem_json,
                                   dsl_problem** out) {
  if (!out) {
    g_last_error = "output handle is null";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  return guarded([&] { *out = new dsl_problem{problem_from_json(problem_json)}; });
}

void dsl_problem_free(dsl_problem* problem) { delete problem; }

dsl_status dsl_problem_info(const dsl_problem* problem, double* sigma_lower,
                            double* tau, double* horizon) {
  if (!problem) {
    g_last_error = "problem handle is null";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  if (sigma_lower) *sigma_lower = problem->problem.sigma_lower;
  if (tau) *tau = problem->problem.delay;
  if (horizon) *horizon = problem->problem.horizon;
  return DSL_OK;
}

dsl_status dsl_solve_path(const dsl_problem* problem, long long steps,
                          unsigned long long seed, double* values,
                          long long values_len) {
  if (!problem || !values) {
    g_last_error = "null argument";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  if (values_len != steps + 1) {
    g_last_error = "values buffer must hold steps+1 entries";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const delaylab::TimeMesh mesh(problem->problem.horizon, steps);
    const auto path = delaylab::sample_brownian(mesh, seed);
    const auto x = delaylab::solve_euler_delay(problem->problem, path);
    std::memcpy(values, x.values.data(), x.values.size() * sizeof(double));
  });
}

dsl_status dsl_first_variation(const dsl_problem* problem, long long steps,
                               unsigned long long seed, long long theta_index,
                               double* values, long long values_len) {
  if (!problem || !values) {
    g_last_error = "null argument";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  if (values_len != steps + 1) {
    g_last_error = "values buffer must hold steps+1 entries";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const delaylab::TimeMesh mesh(problem->problem.horizon, steps);
    const auto path = delaylab::sample_brownian(mesh, seed);
    const auto x = delaylab::solve_euler_delay(problem->problem, path);
    const auto row =
        delaylab::solve_first_variation(problem->problem, x, path, theta_index);
    std::memcpy(values, row.data(), row.size() * sizeof(double));
  });
}

dsl_status dsl_malliavin_norm(const dsl_problem* problem, long long steps,
                              unsigned long long seed, long long grid,
                              double* norm_sq) {
  if (!problem || !norm_sq) {
    g_last_error = "null argument";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  return guarded([&] {
    const delaylab::TimeMesh mesh(problem->problem.horizon, steps);
    const auto path = delaylab::sample_brownian(mesh, seed);
    const auto x = delaylab::solve_euler_delay(problem->problem, path);
    const auto field =
        delaylab::derivative_field(problem->problem, x, path, grid);
    *norm_sq = delaylab::malliavin_norm_sq(field, steps);
  });
}

dsl_status dsl_run_config_json(const char* config_json, const char* output_dir,
                               char** summary_json) {
  if (!config_json) {
    g_last_error = "config JSON is null";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    run_report(delaylab::parse_config_text(config_json), output_dir,
               summary_json);
  });
}

dsl_status dsl_run_config_file(const char* config_path, const char* output_dir,
                               char** summary_json) {
  if (!config_path) {
    g_last_error = "config path is null";
    return DSL_ERR_INVALID_ARGUMENT;
  }
  if (summary_json) *summary_json = nullptr;
  return guarded([&] {
    run_report(delaylab::load_config_file(config_path), output_dir,
               summary_json);
  });
}

}  // extern "C"
