#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "hoc/error.hpp"

namespace hoc {

inline constexpr const char* kConfigSchema = "hoc.experiment/1";

/// Invalid configuration, with the 1-based line of the offending input.
class ConfigError : public InvalidInput {
 public:
  ConfigError(std::size_t line, const std::string& message)
      : InvalidInput("line " + std::to_string(line) + ": " + message), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

enum class ExperimentKind { tensor_norm, certify, verify_tails, weighted, multilinear, rmt, catalog_oracle };
std::string to_string(ExperimentKind kind);

/// Validated experiment description. `body` keeps the parsed JSON for the
/// kind-specific sections (measure, function, tensor, ...).
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::certify;
  std::string name;
  std::uint64_t seed = 0;
  std::size_t samples = 1000000;
  std::size_t profile_samples = 100000;
  std::vector<double> t_grid;
  std::vector<double> p_grid;
  double slack_se = 5.0;
  std::string out;
  nlohmann::json body;
};

/// Parses and validates a config. Throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// One tail curve: bound and empirical P(|f| >= t) with the Wilson interval.
struct Curve {
  std::string name;
  std::string theorem;
  bool expect_failure = false;  // negative control
  std::vector<double> t, bound, empirical, ci_low, ci_high;
};

struct ExtraTable {
  std::string filename;
  std::string content;
};

struct ExperimentResult {
  nlohmann::json report;
  std::vector<Curve> curves;
  std::vector<ExtraTable> tables;
  bool pass = true;
};

ExperimentResult run_experiment(const ExperimentConfig& config);

/// Writes report.json, tail-<curve>.csv, tail-<curve>.svg and extra tables
/// into dir (created if needed).
void write_artifacts(const ExperimentResult& result, const std::filesystem::path& dir);

struct Fixture {
  std::string name;
  std::string route;       // theorem route: 1.1 | 1.2 | 1.3 | 1.4 | 1.5 | 3.1 | 3.2
  std::string provenance;  // REFERENCE (worked example with a stated value) | DERIVED
  std::string description;
  nlohmann::json config;
};

/// Shipped fixtures, in a fixed order.
const std::vector<Fixture>& list_fixtures();
std::optional<Fixture> find_fixture(const std::string& name);
/// One line per fixture: name, route, provenance, description (tab separated).
std::string fixture_inventory();

}  // namespace hoc
