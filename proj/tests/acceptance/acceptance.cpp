// Acceptance suite: runs each criterion end to end at its stated tolerance
// and prints one pass/fail line. Exit code is the number of failed criteria.
//
//   delaylab_acceptance [--criterion N] [--list]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "core/config.hpp"
#include "core/estimator.hpp"
#include "core/malliavin.hpp"
#include "core/model.hpp"
#include "core/rng.hpp"
#include "core/solver.hpp"
#include "../support.hpp"

using namespace delaylab;
using nlohmann::json;

namespace {

namespace fs = std::filesystem;

fs::path out_root() { return fs::path("acceptance_out"); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                       start)
      .count();
}

json strong_rate_config(const std::string& out) {
  return json{{"problem",
               {{"name", "trig_nodelay"},
                {"params", json::object()},
                {"tau", 0.0},
                {"T", 1.0},
                {"phi", {{"kind", "constant"}, {"x0", 1.0}}}}},
              {"experiment",
               {{"kind", "strong_rate"},
                {"levels", {4, 8, 16, 32, 64}},
                {"paths", 2000},
                {"fine_steps", 4096},
                {"seed", 90001}}},
              {"output", out}};
}

json weak_rate_config(const std::string& out) {
  return json{{"problem",
               {{"name", "trig_nodelay"},
                {"params", json::object()},
                {"tau", 0.0},
                {"T", 1.0},
                {"phi", {{"kind", "constant"}, {"x0", 1.0}}}}},
              {"experiment",
               {{"kind", "weak_rate"},
                {"levels", {4, 8, 16, 32}},
                {"paths", 100000},
                {"fine_steps", 4096},
                {"seed", 90002},
                {"test_function", {{"kind", "indicator"}, {"K", 1.0}}}}},
              {"output", out}};
}

json delay_continuity_config(double beta, std::uint64_t seed,
                             const std::string& out) {
  return json{
      {"problem",
       {{"name", "trig"},
        {"params", json::object()},
        {"tau", 0.25},
        {"T", 1.0},
        {"phi",
         {{"kind", "holder"}, {"x0", 1.0}, {"c", 1.0}, {"beta", beta}}}}},
      {"experiment",
       {{"kind", "delay_continuity"},
        {"levels", {0.125, 0.0625, 0.03125, 0.015625}},
        {"paths", 100000},
        {"fine_steps", 4096},
        {"seed", seed},
        {"test_function", {{"kind", "indicator"}, {"K", 1.0}}}}},
      {"output", out}};
}

json bound_check_config(const std::string& out) {
  return json{{"problem",
               {{"name", "trig"},
                {"params", json::object()},
                {"tau", 0.2},
                {"T", 1.0},
                {"phi", {{"kind", "constant"}, {"x0", 1.0}}}}},
              {"experiment",
               {{"kind", "bound_check"},
                {"levels", {0.3}},
                {"paths", 10000},
                {"fine_steps", 5120},
                {"seed", 90006},
                {"test_function", {{"kind", "indicator"}, {"K", 1.0}}}}},
              {"output", out}};
}

ExperimentReport run_config(const json& doc) {
  const ExperimentConfig cfg = parse_config(doc);
  ExperimentReport report = run_experiment(cfg);
  write_report(report, "");
  return report;
}

// --- criterion 1: strong Caratheodory rate -------------------------------

Outcome criterion1() {
  const auto start = std::chrono::steady_clock::now();
  const auto report =
      run_config(strong_rate_config((out_root() / "c1").string()));
  const double elapsed = seconds_since(start);
  std::ostringstream os;
  if (!report.table.fit) {
    return {false, "no rate fit (too many censored levels)"};
  }
  const double slope = report.table.fit->slope;
  const double r2 = report.table.fit->r_squared;
  const bool pass = slope >= -0.65 && slope <= -0.35 && r2 >= 0.95;
  os.precision(4);
  os << "slope=" << slope << " (window [-0.65,-0.35]), r2=" << r2
     << " (>=0.95), " << elapsed << "s (target 300s)";
  return {pass, os.str()};
}

// --- criterion 2: weak Caratheodory rate ---------------------------------

Outcome criterion2() {
  const auto start = std::chrono::steady_clock::now();
  const auto report =
      run_config(weak_rate_config((out_root() / "c2").string()));
  const double elapsed = seconds_since(start);
  std::vector<LevelRow> uncensored;
  for (const auto& row : report.table.rows)
    if (!row.censored) uncensored.push_back(row);
  bool decreasing = uncensored.size() >= 2;
  for (std::size_t k = 0; k + 1 < uncensored.size(); ++k) {
    const double slack =
        2.0 * std::hypot(uncensored[k].std_err, uncensored[k + 1].std_err);
    if (!(uncensored[k + 1].error <= uncensored[k].error + slack))
      decreasing = false;
  }
  std::ostringstream os;
  os.precision(4);
  if (!report.table.fit) {
    os << "no rate fit (" << uncensored.size() << " uncensored levels)";
    return {false, os.str()};
  }
  const double slope = report.table.fit->slope;
  const bool pass = decreasing && slope <= -0.2;
  os << "slope=" << slope << " (<= -0.2), decreasing-within-2sigma="
     << (decreasing ? "yes" : "no") << ", uncensored=" << uncensored.size()
     << ", " << elapsed << "s (target 900s)";
  return {pass, os.str()};
}

// --- criterion 3: delay-continuity Hölder rate ---------------------------

// Slope over every level with a positive error, censored or not; reported as
// a diagnostic when too few levels survive censoring for the official fit.
std::optional<double> diagnostic_slope(const RateTable& table) {
  std::vector<double> levels, errors;
  for (const auto& row : table.rows)
    if (row.error > 0.0) {
      levels.push_back(row.level);
      errors.push_back(row.error);
    }
  if (levels.size() < 3) return std::nullopt;
  return fit_rate(levels, errors).slope;
}

Outcome criterion3() {
  const auto lipschitz = run_config(
      delay_continuity_config(1.0, 90003, (out_root() / "c3_beta1").string()));
  const auto rough = run_config(delay_continuity_config(
      0.25, 90004, (out_root() / "c3_beta025").string()));
  std::ostringstream os;
  os.precision(4);
  auto describe = [&os](const char* label, const RateTable& table, double lo,
                        double hi) {
    os << label << " window [" << lo << "," << hi << "]: ";
    if (table.fit) {
      os << "slope=" << table.fit->slope;
      return table.fit->slope >= lo && table.fit->slope <= hi;
    }
    os << "no fit (";
    std::size_t uncensored = 0;
    for (const auto& row : table.rows) uncensored += row.censored ? 0 : 1;
    os << uncensored << " uncensored";
    if (const auto diag = diagnostic_slope(table))
      os << "; slope incl. censored=" << *diag;
    os << ")";
    return false;
  };
  const bool first = describe("beta=1", lipschitz.table, 0.35, 0.65);
  os << "; ";
  const bool second = describe("beta=0.25", rough.table, 0.10, 0.40);
  return {first && second, os.str()};
}

// --- criterion 4: Malliavin closed forms ---------------------------------

Outcome criterion4() {
  std::ostringstream os;
  bool pass = true;

  const auto pure = catalog_problem("pure_noise", {}, 0.5, 1.0,
                                    InitialSegment::constant(2.0));
  const TimeMesh mesh(1.0, 64);
  const auto path = sample_brownian(mesh, 424242);
  const auto x = solve_euler_delay(pure, path);
  const auto field = derivative_field(pure, x, path, 8);
  bool ones = true;
  for (std::int64_t row = 0; row <= 8; ++row)
    for (std::int64_t i = 0; i <= 64; ++i) {
      const double expected = i < field.theta_index(row) ? 0.0 : 1.0;
      ones = ones && field.at(row, i) == expected;
    }
  pass = pass && ones;
  const bool norms = malliavin_norm_sq(field, 16) == 0.25 &&
                     malliavin_norm_sq(field, 32) == 0.5 &&
                     malliavin_norm_sq(field, 64) == 1.0;
  pass = pass && norms;

  const auto inv1 = inverse_moment(pure, 64, 0.25, 1, 200, 8, 11);
  const auto inv2 = inverse_moment(pure, 64, 0.5, 2, 200, 8, 11);
  const bool inverse_exact = inv1.value == 4.0 && inv1.std_err == 0.0 &&
                             inv2.value == 4.0 && inv2.std_err == 0.0;
  pass = pass && inverse_exact;

  const auto lin =
      catalog_problem("linear_additive", {{"a", 1.0}, {"sigma0", 1.0}}, 0.0,
                      1.0, InitialSegment::constant(1.0));
  const TimeMesh fine(1.0, 4096);
  const auto lpath = sample_brownian(fine, 77);
  const auto lx = solve_euler_delay(lin, lpath);
  const auto row = solve_first_variation(lin, lx, lpath, 2048);
  const double expo = std::exp(0.5);
  const bool expo_ok = std::abs(row[4096] - expo) <= 0.01 * expo;
  const auto lfield = derivative_field(lin, lx, lpath, 64);
  const double norm_ref = (std::exp(2.0) - 1.0) / 2.0;
  const double norm_val = malliavin_norm_sq(lfield, 4096);
  const bool norm_ok = std::abs(norm_val - norm_ref) <= 0.01 * norm_ref;
  pass = pass && expo_ok && norm_ok;

  os.precision(6);
  os << "pure-noise field==1:" << (ones ? "yes" : "NO")
     << ", norm==t:" << (norms ? "yes" : "NO")
     << ", inverse moments==t^-p:" << (inverse_exact ? "yes" : "NO")
     << "; linear D(1)=" << row[4096] << " vs " << expo
     << ", norm=" << norm_val << " vs " << norm_ref << " (1% tolerances)";
  return {pass, os.str()};
}

// --- criterion 5: variation-vs-bump oracle -------------------------------

Outcome criterion5() {
  const auto trig =
      catalog_problem("trig", {}, 0.25, 1.0, InitialSegment::constant(1.0));
  const TimeMesh mesh(1.0, 4096);

  int first_pass = 0;
  const int first_total = 200;
  for (int k = 0; k < first_total; ++k) {
    const auto path =
        sample_brownian(mesh, rng::path_seed(95001, 0, std::uint64_t(k)));
    const auto x = solve_euler_delay(trig, path);
    const auto row = solve_first_variation(trig, x, path, 2048);
    const auto fd = testsupport::bump_derivative(trig, path, 2048, 1e-4);
    if (testsupport::rel_or_abs_error(row[4096], fd[4096], 1e-2, 0.05) <= 1.0)
      ++first_pass;
  }

  // generic grid pair: theta - r away from 0 and +-tau (lag 1024)
  int second_pass = 0;
  const int second_total = 50;
  for (int k = 0; k < second_total; ++k) {
    const auto path =
        sample_brownian(mesh, rng::path_seed(95002, 0, std::uint64_t(k)));
    const auto x = solve_euler_delay(trig, path);
    const auto field = derivative_field(trig, x, path, 8);
    const double analytic =
        solve_second_variation(trig, x, path, field, 512, 2048, 4096);
    const double fd =
        testsupport::double_bump_derivative(trig, path, 512, 2048, 1e-3, 4096);
    if (testsupport::rel_or_abs_error(analytic, fd, 5e-2, 0.10) <= 1.0)
      ++second_pass;
  }

  std::ostringstream os;
  os << "first variation " << first_pass << "/" << first_total
     << " within max(1e-2,5%) (need >=190); second variation " << second_pass
     << "/" << second_total << " within max(5e-2,10%) (need >=45)";
  return {first_pass >= 190 && second_pass >= 45, os.str()};
}

// --- criterion 6: integration-by-parts bound with explicit constants -----

Outcome criterion6() {
  const auto start = std::chrono::steady_clock::now();
  const auto report =
      run_config(bound_check_config((out_root() / "c6").string()));
  const auto& entry = report.summary.at("bound_reports").at(0);
  const double lhs = entry.at("lhs").at("value").get<double>();
  const double lhs_se = entry.at("lhs").at("stderr").get<double>();
  const double term_a = entry.at("term_a").at("value").get<double>();
  const double a_se = entry.at("term_a").at("stderr").get<double>();
  const double term_b = entry.at("term_b").at("value").get<double>();
  const double b_se = entry.at("term_b").at("stderr").get<double>();
  const double margin =
      2.0 * std::sqrt(lhs_se * lhs_se + a_se * a_se + b_se * b_se);
  const bool trig_ok = lhs <= term_a + term_b + margin &&
                       entry.at("inequality_satisfied").get<bool>();

  // pure-noise control: every term exactly zero, delta^2 bound exactly 1/t
  const auto p1 = catalog_problem("pure_noise", {}, 0.25, 1.0,
                                  InitialSegment::constant(0.0));
  auto p2 = p1;
  p2.delay = 0.5;
  const auto control = weak_bound_report(p1, p2, TestFunction::indicator(1.0),
                                         64, 1.0, 200, 8, 5);
  const bool control_ok =
      control.lhs.value == 0.0 && control.term_a.value == 0.0 &&
      control.term_b.value == 0.0 && control.delta2_bound.value == 1.0;

  std::ostringstream os;
  os.precision(4);
  os << "trig lhs=" << lhs << " <= A+B=" << term_a + term_b << " (margin "
     << margin << "): " << (trig_ok ? "yes" : "NO")
     << "; pure-noise control exact: " << (control_ok ? "yes" : "NO") << "; "
     << seconds_since(start) << "s";
  return {trig_ok && control_ok, os.str()};
}

// --- criterion 7: boundedness under mesh doubling ------------------------

struct Suite7 {
  double derivative_moment = 0.0;  // max E|D_theta X(t)|^2
  double path_holder = 0.0;        // max E|X(1)-X(s)|^2 / (1-s)
  double derivative_holder = 0.0;  // max E|D X(1)-D X(s)|^2 / (1-s)
  double second_fourth = 0.0;      // max E|D_r D_theta X(1)|^4
};

Suite7 run_suite7(std::int64_t steps, std::int64_t coarsen) {
  const auto trig =
      catalog_problem("trig", {}, 0.25, 1.0, InitialSegment::constant(1.0));
  const TimeMesh fine_mesh(1.0, steps * coarsen);
  Suite7 s;

  {  // derivative second moments and Hölder quotients
    const int paths = 1000;
    std::map<std::pair<int, int>, double> moment;
    std::map<int, double> dholder;
    std::map<int, double> xholder;
    for (int k = 0; k < paths; ++k) {
      const auto full = sample_brownian(
          fine_mesh, rng::path_seed(97001, 0, std::uint64_t(k)));
      const auto path = coarsen == 1 ? full : coarsen_path(full, coarsen);
      const auto x = solve_euler_delay(trig, path);
      const auto field = derivative_field(trig, x, path, 8);
      for (int row = 0; row <= 8; ++row)
        for (int c = 1; c <= 4; ++c) {
          const double v = field.at(row, c * steps / 4);
          moment[{row, c}] += v * v / paths;
        }
      for (int g = 2; g <= 5; ++g) {
        const std::int64_t gap = steps >> g;
        const double dd = field.at(1, steps) - field.at(1, steps - gap);
        dholder[g] += dd * dd / paths;
        const double dx = x.values[std::size_t(steps)] -
                          x.values[std::size_t(steps - gap)];
        xholder[g] += dx * dx / paths;
      }
    }
    for (const auto& [key, v] : moment)
      s.derivative_moment = std::max(s.derivative_moment, v);
    for (const auto& [g, v] : dholder)
      s.derivative_holder = std::max(
          s.derivative_holder, v / (double(steps >> g) / double(steps)));
    for (const auto& [g, v] : xholder)
      s.path_holder =
          std::max(s.path_holder, v / (double(steps >> g) / double(steps)));
  }

  {  // second-variation fourth moments on the 9x9 grid
    const int paths = 400;
    std::vector<double> acc(81, 0.0);
    for (int k = 0; k < paths; ++k) {
      const auto full = sample_brownian(
          fine_mesh, rng::path_seed(97002, 0, std::uint64_t(k)));
      const auto path = coarsen == 1 ? full : coarsen_path(full, coarsen);
      const auto x = solve_euler_delay(trig, path);
      const auto field = derivative_field(trig, x, path, 8);
      const auto grid = second_variation_grid(trig, x, path, field, steps);
      for (std::size_t i = 0; i < 81; ++i) {
        const double v = grid.values[i];
        acc[i] += v * v * v * v / paths;
      }
    }
    for (const double v : acc) s.second_fourth = std::max(s.second_fourth, v);
  }
  return s;
}

Outcome criterion7() {
  const Suite7 coarse = run_suite7(2048, 2);
  const Suite7 fine = run_suite7(4096, 1);
  auto ratio_ok = [](double a, double b) {
    const double r = a / b;
    return r > 0.5 && r < 2.0;
  };
  const bool m_ok = ratio_ok(fine.derivative_moment, coarse.derivative_moment);
  const bool xh_ok = ratio_ok(fine.path_holder, coarse.path_holder);
  const bool dh_ok =
      ratio_ok(fine.derivative_holder, coarse.derivative_holder);
  const bool s4_ok = ratio_ok(fine.second_fourth, coarse.second_fourth);
  std::ostringstream os;
  os.precision(3);
  os << "N=2048 -> N=4096 ratios: E|D|^2 "
     << fine.derivative_moment / coarse.derivative_moment << ", E|dX|^2/dt "
     << fine.path_holder / coarse.path_holder << ", E|dD|^2/dt "
     << fine.derivative_holder / coarse.derivative_holder << ", E|DD|^4 "
     << fine.second_fourth / coarse.second_fourth << " (all within [0.5,2])";
  return {m_ok && xh_ok && dh_ok && s4_ok, os.str()};
}

// --- criterion 8: byte-identical reruns at any worker count --------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome criterion8() {
  struct Job {
    const char* name;
    json config;
  };
  const std::vector<Job> jobs = {
      {"strong_rate", strong_rate_config("")},
      {"weak_rate", weak_rate_config("")},
      {"bound_check", bound_check_config("")},
  };
  bool pass = true;
  std::ostringstream os;
  for (const auto& job : jobs) {
    std::map<std::string, std::string> csv_by_workers;
    for (const char* workers : {"2", "1"}) {
      json doc = job.config;
      const fs::path dir =
          out_root() / (std::string("c8_") + job.name + "_w" + workers);
      doc["output"] = dir.string();
      setenv("DELAYLAB_WORKERS", workers, 1);
      run_config(doc);
      csv_by_workers[workers] = read_file(dir / "report.csv");
    }
    unsetenv("DELAYLAB_WORKERS");
    const bool same = !csv_by_workers["1"].empty() &&
                      csv_by_workers["1"] == csv_by_workers["2"];
    pass = pass && same;
    os << job.name << " w1==w2: " << (same ? "yes" : "NO") << "; ";
  }
  // run-to-run stability at a fixed worker count
  {
    json doc = strong_rate_config((out_root() / "c8_strong_rerun").string());
    setenv("DELAYLAB_WORKERS", "2", 1);
    run_config(doc);
    const std::string first =
        read_file(out_root() / "c8_strong_rerun" / "report.csv");
    run_config(doc);
    const std::string second =
        read_file(out_root() / "c8_strong_rerun" / "report.csv");
    unsetenv("DELAYLAB_WORKERS");
    const bool same = !first.empty() && first == second;
    pass = pass && same;
    os << "rerun identical: " << (same ? "yes" : "NO");
  }
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<const char*, std::function<Outcome()>>>
      criteria = {
          {"strong Caratheodory rate", criterion1},
          {"weak Caratheodory rate", criterion2},
          {"delay-continuity Hölder rate", criterion3},
          {"Malliavin closed forms", criterion4},
          {"variation-vs-bump oracle", criterion5},
          {"weak bound with explicit constants", criterion6},
          {"boundedness under mesh doubling", criterion7},
          {"byte-identical deterministic reruns", criterion8},
      };

  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--criterion" && i + 1 < argc) {
      selected = std::atoi(argv[++i]);
    } else if (arg == "--list") {
      for (std::size_t k = 0; k < criteria.size(); ++k)
        std::printf("%zu: %s\n", k + 1, criteria[k].first);
      return 0;
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N] [--list]\n", argv[0]);
      return 64;
    }
  }
  if (selected < 0 || std::size_t(selected) > criteria.size()) {
    std::fprintf(stderr, "criterion must be in 1..%zu\n", criteria.size());
    return 64;
  }

  fs::create_directories(out_root());
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (selected != 0 && std::size_t(selected) != k + 1) continue;
    Outcome outcome;
    try {
      outcome = criteria[k].second();
    } catch (const std::exception& e) {
      outcome = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %zu (%s): %s — %s\n", k + 1, criteria[k].first,
                outcome.pass ? "PASS" : "FAIL", outcome.detail.c_str());
    std::fflush(stdout);
    if (!outcome.pass) ++failed;
  }
  return failed;
}
