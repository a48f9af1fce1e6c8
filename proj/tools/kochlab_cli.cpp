// Command-line front end. Talks to the library only through the C API.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "kochlab/kochlab.h"

namespace {

constexpr int kExitInvalid = 2;

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> out;
  std::vector<std::string> suites;
};

void add_common(CLI::App* cmd, Common& c, bool suite_flag) {
  cmd->add_option("--config", c.config_path, "experiment config (JSON)");
  cmd->add_option("--seed", c.seed, "master seed; defaults to the config seed, or 42 without a config");
  cmd->add_option("--workers", c.workers, "worker threads")->check(CLI::Range(1, 1024));
  cmd->add_option("--out", c.out, "output directory");
  if (suite_flag) cmd->add_option("--suite", c.suites, "suite to run (repeatable)");
}

int report_error(int status) {
  std::fprintf(stderr, "error [%s]: %s\n", kochlab_status_name(status), kochlab_last_error());
  return kExitInvalid;
}

int run_suites(const Common& c, const std::vector<std::string>& fixed) {
  kochlab_config* config = nullptr;
  int status = c.config_path.empty() ? kochlab_config_default(c.seed.value_or(42), &config)
                                     : kochlab_config_load(c.config_path.c_str(), &config);
  if (status != KOCHLAB_OK) return report_error(status);
  auto apply = [&]() -> int {
    if (c.seed && (status = kochlab_config_set_seed(config, *c.seed)) != KOCHLAB_OK) return status;
    if (c.workers && (status = kochlab_config_set_workers(config, *c.workers)) != KOCHLAB_OK) return status;
    if (c.out && (status = kochlab_config_set_output_dir(config, c.out->c_str())) != KOCHLAB_OK) return status;
    for (const auto& s : fixed.empty() ? c.suites : fixed) {
      if ((status = kochlab_config_select_suite(config, s.c_str())) != KOCHLAB_OK) return status;
    }
    return KOCHLAB_OK;
  };
  if (apply() != KOCHLAB_OK) {
    kochlab_config_free(config);
    return report_error(status);
  }
  kochlab_report* report = nullptr;
  status = kochlab_run(config, &report);
  kochlab_config_free(config);
  if (status != KOCHLAB_OK) return report_error(status);
  const size_t n = kochlab_report_suite_count(report);
  if (n == 0) std::printf("no suites selected\n");
  for (size_t i = 0; i < n; ++i) {
    const bool ok = kochlab_report_suite_passed(report, i);
    std::printf("%-20s %s\n", kochlab_report_suite_name(report, i), ok ? "PASS" : "FAIL");
    if (!ok) {
      std::string failures = kochlab_report_suite_failures(report, i);
      std::size_t start = 0;
      while (start < failures.size()) {
        std::size_t end = failures.find('\n', start);
        if (end == std::string::npos) end = failures.size();
        std::printf("  failed: %s\n", failures.substr(start, end - start).c_str());
        start = end + 1;
      }
    }
  }
  const int code = kochlab_report_exit_code(report);
  kochlab_report_free(report);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for special flows over rotations with power-singular roofs"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kochlab_version());

  struct Entry {
    const char* name;
    const char* help;
    std::vector<std::string> suites;
  };
  const std::vector<Entry> entries{
      {"cf", "continued fraction and Diophantine class certificate", {"cf"}},
      {"roof-check", "roof model self-check", {"roof_check"}},
      {"birkhoff-scan", "Denjoy-Koksma check and roof ergodic sum residuals", {"denjoy_koksma", "dk0_residual"}},
      {"an-cover", "covers of the small-sum sets and translate averages", {"an_cover", "few_translates"}},
      {"tuple-search", "random search for good singularity tuples", {"tuple_search"}},
      {"orbital", "orbital integral checks", {"orbital_agreement", "case1", "analytic_difference"}},
      {"s2-scan", "decay of the small set of orbital integrals", {"s2_scan"}},
      {"s3-check", "slow recurrence to the bump center", {"s3_check"}},
      {"s1-check", "sublinear orbit integral growth", {"s1_check"}},
      {"clt", "Gaussian bump properties and CLT Monte Carlo", {"theta_properties", "clt"}},
      {"variance", "variance scaling in delta", {"variance_scaling"}},
  };
  std::vector<Common> commons(entries.size());
  std::vector<CLI::App*> commands;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    CLI::App* cmd = app.add_subcommand(entries[i].name, entries[i].help);
    add_common(cmd, commons[i], false);
    commands.push_back(cmd);
  }

  Common run_common;
  CLI::App* run = app.add_subcommand("run", "run the suites listed in a config, or those chosen with --suite");
  add_common(run, run_common, true);

  std::string plot_input, plot_kind, plot_output;
  CLI::App* plot = app.add_subcommand("plot", "render a runner CSV or JSON file as SVG");
  plot->add_option("input", plot_input, "CSV or JSON input")->required();
  plot->add_option("--kind", plot_kind, "histogram, qq, decay or cover")->required();
  plot->add_option("-o,--output", plot_output, "SVG output path")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitInvalid;
  }

  if (plot->parsed()) {
    int status = kochlab_plot(plot_input.c_str(), plot_kind.c_str(), plot_output.c_str());
    return status == KOCHLAB_OK ? 0 : report_error(status);
  }
  if (run->parsed()) return run_suites(run_common, {});
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (commands[i]->parsed()) return run_suites(commons[i], entries[i].suites);
  }
  return kExitInvalid;
}
