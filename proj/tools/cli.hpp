#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kreinlab/experiments.hpp"

namespace kreinlab::cli {

enum ExitCode : int { ok = 0, statistical_failure = 1, usage_error = 2 };

enum class Format { csv, json };

struct RunConfig {
  experiments::ExperimentConfig experiment;
  std::string output;  ///< empty: standard output
  Format format = Format::csv;
};

/// Environment variable that replaces the built-in default seed.
inline constexpr const char* kSeedEnv = "KREINLAB_SEED";

inline constexpr const char* kCsvHeader = "experiment,alpha,beta,param,estimate,std_error,analytic,z,verdict";

std::string build_id();

/// "%.17g".
std::string format_double(double v);

/// Apply a JSON config object onto cfg; unknown keys and bad types throw
/// experiments::ConfigError.
void apply_config_json(const std::string& text, RunConfig& cfg);

std::string resolved_config_json(const RunConfig& cfg);

void write_csv(std::ostream& os, const experiments::ExperimentResult& r, const RunConfig& cfg);
void write_json(std::ostream& os, const experiments::ExperimentResult& r, const RunConfig& cfg);
void write_table_csv(std::ostream& os, const std::vector<experiments::Row>& rows, const RunConfig& cfg);
void write_table_json(std::ostream& os, const std::vector<experiments::Row>& rows, const RunConfig& cfg);

/// Entry point; args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace kreinlab::cli
