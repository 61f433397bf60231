// Command-line front end; links only the public C API of the shared library.
#include <cstdio>
#include <string>

#include "CLI11.hpp"

#include "delaylab/delaylab.h"

namespace {

// 0 success, 1 I/O or internal, 2 validation, 3 numerical (alignment,
// ellipticity and other errors raised once computation is underway).
int exit_code_for(dsl_status status) {
  switch (status) {
    case DSL_OK:
      return 0;
    case DSL_ERR_VALIDATION:
    case DSL_ERR_NOT_FOUND:
      return 2;
    case DSL_ERR_ALIGNMENT:
    case DSL_ERR_ELLIPTICITY:
    case DSL_ERR_INVALID_ARGUMENT:
    case DSL_ERR_CAPABILITY:
      return 3;
    default:
      return 1;
  }
}

int run_command(const std::string& config, const std::string& out_dir) {
  char* summary = nullptr;
  const dsl_status status = dsl_run_config_file(
      config.c_str(), out_dir.empty() ? nullptr : out_dir.c_str(), &summary);
  if (status != DSL_OK) {
    std::fprintf(stderr, "error (%s): %s\n", dsl_status_name(status),
                 dsl_last_error());
    return exit_code_for(status);
  }
  if (summary) {
    std::fputs(summary, stdout);
    std::fputc('\n', stdout);
    dsl_string_free(summary);
  }
  return 0;
}

int catalog_list_command() {
  char* names = dsl_catalog_list();
  if (!names) {
    std::fprintf(stderr, "error: %s\n", dsl_last_error());
    return 1;
  }
  std::fputs(names, stdout);
  dsl_string_free(names);
  return 0;
}

int catalog_describe_command(const std::string& name) {
  char* text = dsl_catalog_describe(name.c_str());
  if (!text) {
    std::fprintf(stderr, "error: %s\n", dsl_last_error());
    return 2;
  }
  std::fputs(text, stdout);
  dsl_string_free(text);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"delaylab: Monte Carlo experiments for delay SDEs"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("--config", config_path, "path to a JSON experiment config")
      ->required();
  run->add_option("--out", out_dir,
                  "output directory (overrides the config's output path)");

  auto* catalog = app.add_subcommand("catalog", "inspect the problem catalog");
  catalog->require_subcommand(1);
  catalog->add_subcommand("list", "list catalog problem names");
  std::string describe_name;
  auto* describe =
      catalog->add_subcommand("describe", "describe one catalog problem");
  describe->add_option("name", describe_name, "problem name")->required();

  CLI11_PARSE(app, argc, argv);

  if (run->parsed()) return run_command(config_path, out_dir);
  if (catalog->get_subcommand("list")->parsed()) return catalog_list_command();
  return catalog_describe_command(describe_name);
}
