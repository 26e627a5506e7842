// Command-line front end: flag parsing (with key=value config files),
// experiment dispatch, CSV/JSON export, and run manifests for reproducibility.
#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace pcf {

inline constexpr const char* kToolName = "pcf";
inline constexpr const char* kToolVersion = "1.0.0";

struct ExperimentConfig {
  std::string command;             // empty when --help/--version was served
  std::vector<std::string> argv;   // original arguments, recorded in the manifest

  // graph spec (simulate)
  std::string grid_spec;           // "WIDTHxHEIGHT"
  std::uint32_t tree_d = 0;
  std::uint32_t tree_depth = 0;
  std::string edge_list_path;
  std::string graph_name = "edge";  // oracle-check: edge|p3|p4|c3|c4|s3

  // run parameters
  double alpha = 1.0;
  std::vector<double> alphas;      // crossing-curve / star-bound sweeps
  std::string alpha_range;         // "lo:hi:step" sweep shorthand
  std::uint64_t replicas = 1000;
  std::uint64_t seed = 0;
  std::uint32_t threads = 1;       // 0 = hardware concurrency
  std::string variant = "pcf";     // pcf|warm|percolation
  double percolation_t = 0.6931471805599453;  // ln 2
  double t_max = std::numeric_limits<double>::infinity();
  std::uint64_t histogram_min = 0;  // simulate: emit a size histogram when > 0

  // crossing-curve / estimate-alpha-c
  std::vector<std::uint32_t> n_values;
  std::uint32_t n = 128;
  double alpha_lo = 0.45;
  double alpha_hi = 0.65;
  double target_width = 0.02;
  std::uint64_t budget = 100000;

  // tree commands
  std::uint32_t d = 2;
  std::uint64_t k_max = 1000;
  std::uint64_t fit_lo = 0;  // 0 = default window
  std::uint64_t fit_hi = 0;
  std::vector<double> times;

  // star-bound
  std::uint32_t degree = 4;
  double p_c = 0.0;  // > 0: also solve for the critical freeze rate

  // output
  std::string config_path;    // key = value defaults file; command line wins
  std::string out_path;       // empty = stdout, no manifest sidecar
  std::string format = "json";  // csv|json
  bool gnuplot = false;       // also emit a .gp plotting stub next to CSV
};

// Parses arguments (program name excluded).  --help/--version print to
// stdout and yield a config with empty command.  Invalid input throws
// UsageError.
ExperimentConfig parse_args(const std::vector<std::string>& args);

// Runs the configured experiment; writes results (and, when writing to a
// file, a <out>.manifest.json sidecar) atomically.  Returns 0 on success;
// failures are reported by exception.
int execute(const ExperimentConfig& config);

// parse + execute + exception-to-exit-code mapping (ErrorCode values).
int run_cli(int argc, const char* const* argv);

}  // namespace pcf
