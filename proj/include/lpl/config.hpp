#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lpl/branching_chars.hpp"
#include "lpl/exponents.hpp"

namespace lpl {

enum class RunMode {
  validate,
  criteria_perpetuity,
  criteria_branching,
  simulate_perpetuity,
  estimate_moment,
  simulate_branching,
  verify_martingale,
  spine,
};

std::string to_string(RunMode m);
RunMode run_mode_from_string(const std::string& s);

/// One experiment. Exactly one of the two models is present, depending on
/// the mode family.
struct RunConfig {
  RunMode mode = RunMode::validate;
  bool has_triplet = false;
  bool has_chars = false;
  LevyTriplet triplet;
  BranchingChars chars;

  double p = 1.0;
  double T = 1.0;
  int n_samples = 1000;
  int n_iter = 0;  // <= 0 selects the adaptive stopping rule
  double eps = 1e-3;
  int max_particles = 1000000;
  std::vector<double> times;  // martingale-trace / snapshot times
  int dump_paths = 0;

  std::uint64_t seed = 0;
  bool seed_given = false;

  std::string output_dir = ".";
};

/// Parse a config document; throws ConfigError with a field-path diagnostic.
RunConfig parse_config(const std::string& json_text);

/// Read and parse a config file.
RunConfig load_config(const std::string& path);

/// Canonical deterministic serialization; parse(config_to_json(c)) == c.
std::string config_to_json(const RunConfig& c);

}  // namespace lpl
