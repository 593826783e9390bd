#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "gtsd/errors.hpp"

namespace gtsd {

/// The shared secrets of one hide/extract agreement. Both parties must hold
/// identical values (and byte-identical model and table files).
struct SessionConfig {
  uint64_t seed = 0;
  uint64_t k = 0;            // batch size, power of two
  int l_min = 5;
  int l_max = 25;
  std::vector<int> steps;    // inference timesteps, strictly decreasing
  std::string table_path;
  std::string model_path;
};

/// Checks k and the length range; step bounds are checked against the model.
void validate_session(const SessionConfig& cfg);

/// count evenly spaced timesteps from T down to 1.
std::vector<int> make_skip_steps(int total_steps, int count);

/// key=value lines: seed, k, l_min, l_max, steps (comma-separated), table,
/// model. Order is fixed on write; unknown keys are rejected on parse.
SessionConfig parse_session_lines(const std::vector<std::string>& lines);
std::vector<std::string> session_lines(const SessionConfig& cfg);

SessionConfig load_session_file(const std::string& path);
void save_session_file(const SessionConfig& cfg, const std::string& path);

}  // namespace gtsd
