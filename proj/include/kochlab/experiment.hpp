#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace kochlab {

using Json = nlohmann::ordered_json;

inline constexpr int kConfigSchemaVersion = 1;

// Suite names in pipeline order (cf -> roof -> covers -> tuples -> cocycle -> clt).
const std::vector<std::string>& suite_names();

struct ExperimentConfig {
  Json document;  // validated input with every default filled in
  std::uint64_t seed = 0;
  int workers = 1;
  int chunk_size = 256;
  std::string output_dir = "out";
  std::vector<std::string> suites;  // pipeline order
};

// Fail-closed: unknown keys, wrong types and out-of-range values raise a
// config-invalid error naming the key.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// The built-in defaults with the given seed and no suites.
ExperimentConfig default_config(std::uint64_t seed = 42);

struct RunOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::string> output_dir;
  // Restricts the run to these suites; suites missing from the config run with defaults.
  std::vector<std::string> suites;
};

ExperimentConfig apply_overrides(const ExperimentConfig& config, const RunOverrides& overrides);

struct SuiteResult {
  std::string name;
  std::string anchor;  // the result of the paper the suite probes, by name
  bool passed = false;
  bool budget_exceeded = false;
  std::vector<std::string> failed_invariants;
  Json statistics = Json::object();
  std::vector<std::string> artifacts;  // relative to the output directory
  double seconds = 0.0;                // wall clock; kept out of the report file
};

struct ExperimentReport {
  std::vector<SuiteResult> suites;
  std::string json;  // contents of report.json
  bool passed = false;
  int exit_code = 0;  // 0 all passed, 1 a suite failed, 3 a runtime budget was exceeded
  std::vector<std::string> artifacts;
};

// Runs the configured suites in pipeline order, writing report.json and the
// CSV/JSON/SVG artifacts into the output directory.
ExperimentReport run_experiment(const ExperimentConfig& config);

}  // namespace kochlab
