#pragma once

// Named verification experiments.  Each one simulates (or integrates) a
// quantity with a known law and scores it row by row: Monte Carlo rows by
// |z| against a per-estimate threshold, deterministic rows by a tolerance.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "kreinlab/mc.hpp"

namespace kreinlab::experiments {

/// Invalid or inconsistent configuration (the CLI maps it to exit code 2).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class UnknownExperiment : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

struct ExperimentConfig {
  std::string name;
  double alpha = 0.0;
  double beta = 1.0;
  double t = 0.5;                       ///< local-time horizon (or increment length)
  std::vector<double> lambda_grid;      ///< Laplace arguments
  std::uint64_t n_paths = 0;
  double dt = 1e-4;                     ///< step near 0 (walks) or bridge grid step
  double eta = 0.05;                    ///< relative step away from 0
  double v0 = 0.01;                     ///< excursion lifetime cut
  std::vector<double> x_grid;           ///< levels for maxima, points for tables
  std::vector<double> gamma_grid;       ///< GIG Laplace arguments
  double x0 = 1.0;                      ///< GIG starting point
  double level = 1.0;                   ///< first-passage level
  double k = 1.0;                       ///< multiplier of h; 0 = calibrate
  double floor_scale = 0.25;            ///< singular floor = floor_scale * dt^0.4
  double limit_x = 0.5;                 ///< x for the beta -> 0 limit check
  std::uint64_t seed = 1;
  double z_max = 3.5;
  unsigned threads = 0;

  /// Throws ConfigError when a field is outside what the experiment accepts.
  void validate() const;
};

/// The defaults of a registered experiment; throws UnknownExperiment.
ExperimentConfig default_config(std::string_view name);

struct ExperimentInfo {
  std::string name;
  std::string checks;  ///< one line: the identity being verified
};

const std::vector<ExperimentInfo>& list_experiments();
bool is_registered(std::string_view name);

enum class RowKind {
  estimate,  ///< Monte Carlo: pass iff |z| <= threshold
  check,     ///< deterministic: pass iff |estimate - analytic| <= threshold (relative when flagged)
  pvalue,    ///< goodness of fit: pass iff estimate >= threshold
  info,      ///< reported, not scored
};

struct Row {
  std::string param;  ///< label with its parameter, e.g. laplace(lambda=0.5)
  double estimate = 0.0;
  double std_error = 0.0;
  std::optional<double> analytic;
  std::optional<double> z;
  RowKind kind = RowKind::info;
  std::optional<double> threshold;  ///< unset estimate rows take the experiment z threshold
  bool relative = false;
  bool pass = true;
};

std::string_view verdict_label(const Row& row);

struct ExperimentResult {
  std::string name;
  ExperimentConfig config;
  std::vector<Row> rows;
  std::map<std::string, double> metadata;  ///< resolved calibration constant, counts, rates
  double z_threshold = 0.0;                ///< effective per-estimate |z| bound
  bool verdict = false;
  double wall_seconds = 0.0;

  /// Monte Carlo rows as estimates (value, SE, analytic, z).
  std::vector<mc::McEstimate> estimates() const;
};

/// Run a registered experiment.  Deterministic given the config (including
/// the seed), for any thread count.
ExperimentResult run_experiment(const ExperimentConfig& config);

/// Closed-form values on the config grids, no simulation.  With an empty
/// name every table is produced.
std::vector<Row> analytic_tables(const ExperimentConfig& config);

struct SelftestItem {
  std::string name;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

/// Fast deterministic invariants across all modules.
std::vector<SelftestItem> run_selftest();

}  // namespace kreinlab::experiments
