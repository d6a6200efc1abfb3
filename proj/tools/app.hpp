#pragma once

// Subcommands of the msent tool, callable without going through argv.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "msent/nn.hpp"

namespace msent::app {

using Json = nlohmann::json;

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kConfigError = 2,
  kRuntimeError = 3,
};

struct CommandOptions {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  bool verify = true;
};

/// Parses a JSON file; syntax errors report line, column and the offending line.
Json load_config(const std::string& path);
Json parse_config(const std::string& text, const std::string& origin);

int cmd_solve_tabular(const CommandOptions& opts, std::ostream& log);
int cmd_solve_gaussian(const CommandOptions& opts, std::ostream& log);
int cmd_experiment(const CommandOptions& opts, std::ostream& log);
int cmd_bounds(const CommandOptions& opts, std::ostream& log);

// ---------------------------------------------------------------------------
// Teacher-student sweep

struct ExperimentConfig {
  nn::TeacherStudentConfig problem;
  std::vector<double> alphas;
  std::vector<double> sigma1s;
  Index test_inputs = 2000;
  Index weight_samples = 200;
  std::uint64_t seed = 0;
};

/// Default alpha grid {0, 0.05, ..., 0.95, 0.999}.
std::vector<double> default_alphas();
/// `count` log-spaced points from 10^lo to 10^hi.
std::vector<double> log_grid(double lo, double hi, std::size_t count);

ExperimentConfig experiment_config_from_json(const Json& j);
Json to_json(const ExperimentConfig& cfg);

struct SweepRow {
  double alpha;
  double sigma1;
  double risk;
  double risk_stderr;
};

struct SummaryRow {
  double alpha;
  double sigma1;
  double risk;
  double risk_stderr;
};

/// One row per (alpha, sigma1), sorted by alpha then sigma1.
std::vector<SweepRow> run_sweep(const ExperimentConfig& cfg, std::size_t workers);
/// Minimum risk over sigma1 for each alpha.
std::vector<SummaryRow> summarize(const std::vector<SweepRow>& rows);

std::string sweep_csv(const std::vector<SweepRow>& rows, const Json& config);
std::string summary_csv(const std::vector<SummaryRow>& rows, const Json& config);

/// Path of the summary file written next to `out`: <stem>_summary.csv.
std::string summary_path(const std::string& out);

}  // namespace msent::app
