#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "critfield/quadrature.hpp"
#include "critfield/reaction.hpp"
#include "critfield/spde.hpp"

namespace critfield {

inline constexpr const char* kCodeVersion = "critfield 0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class ExperimentKind { convergence, corollary, tails, malliavin, sigma_limit };

std::string to_string(ExperimentKind kind);

struct ReactionSpec {
  std::string name = "allen-cahn";
  double lambda = 1.0;
  std::vector<double> coefficients;
  std::optional<ClassConstants> constants;

  Reaction build() const;
};

struct ExperimentConfig {
  ExperimentKind experiment = ExperimentKind::convergence;
  ReactionSpec reaction;
  std::vector<double> epsilons{0.2, 0.1, 0.05};
  double mass = 0.0;
  double T = 0.25;
  std::optional<double> Tprime;
  double L = 4.0;
  Index n = 512;
  int replicas = 64;
  std::uint64_t seed = 20240917;
  int substeps = 8;
  double dq = 1e-3;
  VarianceMode variance_mode = VarianceMode::grid;
  int quadrature_nodes = 64;
  std::optional<NonlinearScheme> scheme;
  std::optional<double> delta;
  int z_points = 3;
  int fd_probes = 10;
  int threads = 1;
  std::filesystem::path out = "out";

  /// Range checks; throws ConfigError.
  void validate() const;
  nlohmann::json to_json() const;
  /// Stable 64-bit FNV-1a of the canonical JSON form, as 16 hex digits.
  std::string hash() const;
};

/// Parses a config object; missing keys keep their defaults. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& j);
ExperimentConfig load_config(const std::filesystem::path& path);

enum class RowStatus { ok, fail, blowup };

std::string to_string(RowStatus s);

/// One results.csv row. `value` is a replica mean with `stderr_` its
/// standard error (sample std / sqrt(R)).
struct McRow {
  std::string experiment;
  double epsilon = 0.0;
  double T = 0.0;
  double value = 0.0;
  double stderr_ = 0.0;
  int replicas = 0;
  double wall_ms = 0.0;
  RowStatus status = RowStatus::ok;
};

struct CheckOutcome {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct McResult {
  ExperimentConfig config;
  std::vector<McRow> rows;
  std::vector<CheckOutcome> checks;
  std::vector<std::string> warnings;
  nlohmann::json extra = nlohmann::json::object();
  /// Optional CSV table emitted next to results.csv (sigma paths).
  std::string table_csv;
  bool numerical_fault = false;

  bool all_passed() const;
};

/// Mean and standard error of per-replica values, reduced in index order.
struct Summary {
  double mean = 0.0;
  double stderr_ = 0.0;
};
Summary summarize(const std::vector<double>& values);

/// Runs body(r) for r in [0, count) on `threads` workers.
void parallel_for(int count, int threads, const std::function<void(int)>& body);

/// sqrt(T + eps^2) * spatial RMS of u - v.
double normalized_error(const RealField& u, const RealField& v, double T, double eps);

McResult run_convergence(const ExperimentConfig& cfg);
McResult run_corollary(const ExperimentConfig& cfg);
McResult run_tails(const ExperimentConfig& cfg);
McResult run_malliavin(const ExperimentConfig& cfg);
McResult run_sigma_limit(const ExperimentConfig& cfg);
McResult run_experiment(const ExperimentConfig& cfg);

/// results.csv, meta.json and (when present) sigma_paths.csv under `dir`.
void write_results(const McResult& result, const std::filesystem::path& dir);
void write_results_csv(std::ostream& out, const McResult& result);
nlohmann::json result_metadata(const McResult& result);

}  // namespace critfield
