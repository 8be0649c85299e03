// Command-line driver for the concentration toolkit.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "hoc/error.hpp"
#include "hoc/experiments.hpp"
#include "hoc/measures.hpp"
#include "hoc/report_io.hpp"
#include "hoc/tensor.hpp"

namespace {

int run_config(hoc::ExperimentConfig config, const std::string& out_override) {
  std::filesystem::path out = out_override.empty() ? config.out : out_override;
  if (out.empty()) out = std::filesystem::path("out") / config.name;
  const hoc::ExperimentResult result = hoc::run_experiment(config);
  hoc::write_artifacts(result, out);
  std::cout << config.name << ": " << (result.pass ? "PASS" : "FAIL") << " (" << out.string() << ")\n";
  return result.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Higher-order concentration certificates and Monte Carlo verification"};
  app.require_subcommand(1);

  std::string config_path, fixture_name, out_dir, tensor_path, mode = "both";
  std::string dist = "uniform01";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
  double param = 1.0;

  auto* run = app.add_subcommand("run", "Run an experiment config and write report.json, CSV and SVG artifacts");
  auto* config_opt = run->add_option("--config", config_path, "Experiment config (JSON)");
  run->add_option("--fixture", fixture_name, "Run a shipped fixture by name instead of a config file")
      ->excludes(config_opt);
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", out_dir, "Output directory");
  run->add_option("--samples", samples, "Override the sample count (draw count M for rmt)");

  auto* list = app.add_subcommand("list-fixtures", "Print the fixture inventory");

  auto* tensor = app.add_subcommand("tensor-norm", "Operator and Hilbert-Schmidt norms of a tensor file");
  tensor->add_option("--config", tensor_path, "Tensor JSON {order, dim, entries}")->required();
  tensor->add_option("--mode", mode, "iterative | certified | both")
      ->check(CLI::IsMember({"iterative", "certified", "both"}));
  tensor->add_option("--seed", seed, "Seed of the random restarts");
  tensor->add_option("--out", out_dir, "Output directory");

  auto* oracle = app.add_subcommand("catalog-oracle", "Spectral-gap oracle for a catalog law");
  oracle->add_option("dist", dist, "gaussian | laplace | exponential | uniform01 | student")
      ->check(CLI::IsMember({"gaussian", "laplace", "exponential", "uniform01", "student"}));
  oracle->add_option("--param", param, "sd (gaussian), scale b (laplace), rate (exponential), alpha (student)");
  oracle->add_option("--config", config_path, "catalog-oracle experiment config instead of dist/--param");
  oracle->add_option("--out", out_dir, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*list) {
      std::cout << hoc::fixture_inventory();
      return 0;
    }
    if (*run) {
      hoc::ExperimentConfig config;
      if (!fixture_name.empty()) {
        const auto fixture = hoc::find_fixture(fixture_name);
        if (!fixture) throw hoc::ConfigError(1, "unknown fixture " + fixture_name);
        config = hoc::parse_config(fixture->config.dump(2));
      } else if (!config_path.empty()) {
        config = hoc::load_config(config_path);
      } else {
        throw hoc::ConfigError(1, "run needs --config or --fixture");
      }
      if (seed) config.seed = *seed;
      if (samples) {
        config.samples = *samples;
        if (config.kind == hoc::ExperimentKind::rmt) config.body["M"] = *samples;
      }
      return run_config(config, out_dir);
    }
    if (*tensor) {
      std::ifstream in(tensor_path);
      if (!in) throw hoc::ConfigError(1, "cannot open " + tensor_path);
      nlohmann::json t;
      try {
        t = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw hoc::ConfigError(1, std::string("malformed JSON: ") + e.what());
      }
      nlohmann::json c = {{"schema", hoc::kConfigSchema}, {"kind", "tensor-norm"}, {"name", "tensor-norm"},
                          {"seed", seed.value_or(0x5eed)}, {"tensor", t}, {"mode", mode}};
      return run_config(hoc::parse_config(c.dump(2)), out_dir);
    }
    if (*oracle) {
      hoc::ExperimentConfig config;
      if (!config_path.empty()) {
        config = hoc::load_config(config_path);
      } else {
        nlohmann::json params = nlohmann::json::object();
        if (dist == "gaussian") params = {{"mean", 0.0}, {"sd", param}};
        if (dist == "laplace") params = {{"loc", 0.0}, {"scale", param}};
        if (dist == "exponential") params = {{"rate", param}};
        if (dist == "student") params = {{"alpha", param}};
        nlohmann::json c = {{"schema", hoc::kConfigSchema}, {"kind", "catalog-oracle"},
                            {"name", "oracle-" + dist}, {"seed", 0},
                            {"coord", {{"dist", dist}, {"params", params}}}};
        config = hoc::parse_config(c.dump(2));
      }
      return run_config(config, out_dir);
    }
  } catch (const hoc::ConfigError& e) {
    std::cerr << "invalid config: " << e.what() << '\n';
    return 2;
  } catch (const hoc::InvalidInput& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return 2;
  } catch (const hoc::MissingHypothesis& e) {
    std::cerr << "missing hypothesis: " << e.what() << '\n';
    return 2;
  } catch (const hoc::Uncertified& e) {
    std::cerr << "uncertified measure: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
