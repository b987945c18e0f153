#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "signet/selection.hpp"

namespace signet::cli {

struct RunConfig {
  std::string command;
  std::string input;  // count table
  std::string from;   // fit document
  std::string out = ".";
  int k = 0;
  std::vector<std::string> models;   // one for all signatures, or one each
  std::vector<std::string> options;  // select: parametrizations to combine
  std::optional<int> n_starts;
  std::optional<int> start_iters;
  std::optional<double> tol;
  int max_iters = 10000;
  std::uint64_t seed = 1;
  int threads = 0;
  ObservationCount n_obs = ObservationCount::nonzero;
  int reps = 50;
  std::vector<double> fractions{0.01, 0.02, 0.05};
  int flanks = 1;
  bool lenient = false;

  /// Throws std::invalid_argument naming the first bad field.
  void validate() const;

  /// Everything that affects the outputs, in a fixed key order. Thread count
  /// and output paths are left out.
  nlohmann::json to_json() const;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',');
std::vector<double> parse_fractions(const std::string& s);

/// 64-bit FNV-1a, as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

/// Each command writes its artifacts and manifest.json under config.out and
/// returns the process exit status.
int cmd_fit(const RunConfig& config);
int cmd_select(const RunConfig& config);
int cmd_bootstrap(const RunConfig& config);
int cmd_downsample(const RunConfig& config);
int cmd_simulate(const RunConfig& config);
int cmd_design_export(const RunConfig& config);

int run(const RunConfig& config);

/// One-line JSON error record for stderr.
std::string error_record(const std::string& command, const std::string& kind, const std::string& message);

}  // namespace signet::cli
