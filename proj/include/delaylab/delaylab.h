/* delaylab: Monte Carlo laboratory for scalar SDEs with constant time delay.
 *
 * C interface of the shared library. All functions return a dsl_status;
 * on failure dsl_last_error() holds a human-readable message (thread-local,
 * valid until the next failing call on the same thread). Strings returned as
 * char* are owned by the caller and released with dsl_string_free().
 */
#ifndef DELAYLAB_H
#define DELAYLAB_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define DELAYLAB_API_VERSION 1

typedef enum dsl_status {
  DSL_OK = 0,
  DSL_ERR_INVALID_ARGUMENT = 1,
  DSL_ERR_NOT_FOUND = 2,
  DSL_ERR_VALIDATION = 3,
  DSL_ERR_ALIGNMENT = 4,
  DSL_ERR_ELLIPTICITY = 5,
  DSL_ERR_CAPABILITY = 6,
  DSL_ERR_IO = 7,
  DSL_ERR_INTERNAL = 8
} dsl_status;

const char* dsl_version(void);
int dsl_api_version(void);
const char* dsl_status_name(dsl_status status);
const char* dsl_last_error(void);
void dsl_string_free(char* s);

/* Benchmark problem catalog. dsl_catalog_list returns newline-separated
 * names; dsl_catalog_describe returns NULL for unknown names. */
char* dsl_catalog_list(void);
char* dsl_catalog_describe(const char* name);

/* Opaque problem handle built from the same JSON object the experiment
 * config uses, e.g.
 *   {"name":"trig","params":{},"tau":0.25,"T":1.0,
 *    "phi":{"kind":"constant","x0":1.0}}                                  */
typedef struct dsl_problem dsl_problem;

dsl_status dsl_problem_create_json(const char* problem_json,
                                   dsl_problem** out);
void dsl_problem_free(dsl_problem* problem);
dsl_status dsl_problem_info(const dsl_problem* problem, double* sigma_lower,
                            double* tau, double* horizon);

/* One Euler path on the uniform mesh with `steps` steps; `values` receives
 * steps+1 nodes. Identical (problem, steps, seed) reproduce identical bits. */
dsl_status dsl_solve_path(const dsl_problem* problem, long long steps,
                          unsigned long long seed, double* values,
                          long long values_len);

/* First variational trajectory D_theta X(t_i) along the same path;
 * theta_index is a mesh node. `values` receives steps+1 entries, zero before
 * theta_index. */
dsl_status dsl_first_variation(const dsl_problem* problem, long long steps,
                               unsigned long long seed, long long theta_index,
                               double* values, long long values_len);

/* Squared L2 norm of the Malliavin derivative at the horizon for one path,
 * quadratured over a theta grid with `grid` panels (grid must divide steps). */
dsl_status dsl_malliavin_norm(const dsl_problem* problem, long long steps,
                              unsigned long long seed, long long grid,
                              double* norm_sq);

/* Runs a full experiment config (JSON text or file path). Writes report.csv
 * and report.json under the config's output directory (or output_dir when
 * non-NULL). When summary_json is non-NULL it receives the JSON summary. */
dsl_status dsl_run_config_json(const char* config_json, const char* output_dir,
                               char** summary_json);
dsl_status dsl_run_config_file(const char* config_path, const char* output_dir,
                               char** summary_json);

#ifdef __cplusplus
}
#endif

#endif /* DELAYLAB_H */
