// critfield <experiment> --config <path.json> [--out <dir>] [--seed <u64>] [--threads <k>]
//
// Exit codes: 0 all checks pass, 1 a check failed, 2 configuration error,
// 3 numerical fault (blow-up or sigma leaving its admissible range).

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include <CLI11.hpp>

#include "critfield/experiments.hpp"
#include "critfield/spde.hpp"

namespace {

constexpr int kPass = 0;
constexpr int kCheckFailure = 1;
constexpr int kConfigError = 2;
constexpr int kNumericalFault = 3;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo and ODE experiments for the log-attenuated critical 2D reaction-diffusion equation"};
  std::string experiment;
  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  app.add_option("experiment", experiment, "convergence | corollary | tails | malliavin | sigma-limit")->required();
  app.add_option("--config", config_path, "JSON experiment configuration")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override the configured seed");
  app.add_option("--threads", threads, "worker threads for replicas");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  critfield::McResult result;
  try {
    auto cfg = critfield::load_config(config_path);
    if (critfield::to_string(cfg.experiment) != experiment) {
      nlohmann::json raw;
      std::ifstream(config_path) >> raw;
      if (raw.contains("experiment")) {
        throw critfield::ConfigError("config describes '" + critfield::to_string(cfg.experiment) +
                                     "' but '" + experiment + "' was requested");
      }
      raw["experiment"] = experiment;
      cfg = critfield::parse_config(raw);
    }
    if (seed) cfg.seed = *seed;
    if (threads) cfg.threads = *threads;
    cfg.out = out_dir;
    cfg.validate();
    result = critfield::run_experiment(cfg);
    critfield::write_results(result, out_dir);
  } catch (const critfield::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const critfield::BlowUpError& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kNumericalFault;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical fault: " << e.what() << '\n';
    return kNumericalFault;
  }

  for (const auto& w : result.warnings) std::cerr << "warning: " << w << '\n';
  for (const auto& c : result.checks) {
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " [" << c.detail << "]\n";
  }
  std::cout << "results written to " << out_dir << '\n';
  if (result.numerical_fault) return kNumericalFault;
  return result.all_passed() ? kPass : kCheckFailure;
}
