#include "gtsd/session.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>

namespace gtsd {

void validate_session(const SessionConfig& cfg) {
  require(cfg.k >= 2 && std::has_single_bit(cfg.k), Errc::not_power_of_two,
          "batch size k must be a power of two >= 2");
  require(cfg.l_min >= 5 && cfg.l_min <= cfg.l_max, Errc::bad_range,
          "need 5 <= l_min <= l_max");
  require(!cfg.steps.empty(), Errc::bad_step_sequence, "session needs at least one timestep");
  int prev = cfg.steps.front() + 1;
  for (int t : cfg.steps) {
    require(t >= 1 && t < prev, Errc::bad_step_sequence,
            "timesteps must be strictly decreasing and positive");
    prev = t;
  }
}

std::vector<int> make_skip_steps(int total_steps, int count) {
  require(total_steps >= 1, Errc::bad_steps, "schedule needs at least one step");
  require(count >= 1 && count <= total_steps, Errc::bad_steps,
          "step count must lie in [1, T]");
  std::vector<int> steps(static_cast<size_t>(count));
  if (count == 1) {
    steps[0] = total_steps;
    return steps;
  }
  const double stride = static_cast<double>(total_steps - 1) / (count - 1);
  for (int i = 0; i < count; ++i)
    steps[static_cast<size_t>(i)] = total_steps - static_cast<int>(std::lround(i * stride));
  return steps;
}

namespace {
uint64_t parse_u64(const std::string& s, const std::string& key) {
  uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(ec == std::errc() && p == s.data() + s.size(), Errc::bad_format,
          "bad unsigned value for " + key + ": " + s);
  return v;
}

int parse_int(const std::string& s, const std::string& key) {
  const uint64_t v = parse_u64(s, key);
  require(v <= 1000000, Errc::bad_format, "value out of range for " + key + ": " + s);
  return static_cast<int>(v);
}
}  // namespace

SessionConfig parse_session_lines(const std::vector<std::string>& lines) {
  SessionConfig cfg;
  bool saw_seed = false, saw_k = false;
  for (const auto& line : lines) {
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    require(eq != std::string::npos, Errc::bad_format, "session line lacks '=': " + line);
    const std::string key = line.substr(0, eq);
    const std::string value = line.substr(eq + 1);
    if (key == "seed") {
      cfg.seed = parse_u64(value, key);
      saw_seed = true;
    } else if (key == "k") {
      cfg.k = parse_u64(value, key);
      saw_k = true;
    } else if (key == "l_min") {
      cfg.l_min = parse_int(value, key);
    } else if (key == "l_max") {
      cfg.l_max = parse_int(value, key);
    } else if (key == "steps") {
      cfg.steps.clear();
      size_t at = 0;
      while (at <= value.size()) {
        const size_t comma = std::min(value.find(',', at), value.size());
        cfg.steps.push_back(parse_int(value.substr(at, comma - at), key));
        at = comma + 1;
      }
    } else if (key == "table") {
      cfg.table_path = value;
    } else if (key == "model") {
      cfg.model_path = value;
    } else {
      fail(Errc::bad_format, "unknown session key: " + key);
    }
  }
  require(saw_seed && saw_k, Errc::bad_format, "session needs seed and k");
  validate_session(cfg);
  return cfg;
}

std::vector<std::string> session_lines(const SessionConfig& cfg) {
  std::vector<std::string> lines;
  lines.push_back("seed=" + std::to_string(cfg.seed));
  lines.push_back("k=" + std::to_string(cfg.k));
  lines.push_back("l_min=" + std::to_string(cfg.l_min));
  lines.push_back("l_max=" + std::to_string(cfg.l_max));
  std::string steps;
  for (size_t i = 0; i < cfg.steps.size(); ++i) {
    if (i) steps += ',';
    steps += std::to_string(cfg.steps[i]);
  }
  lines.push_back("steps=" + steps);
  lines.push_back("table=" + cfg.table_path);
  lines.push_back("model=" + cfg.model_path);
  return lines;
}

SessionConfig load_session_file(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Errc::io_error, "cannot open session file: " + path);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return parse_session_lines(lines);
}

void save_session_file(const SessionConfig& cfg, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  require(out.good(), Errc::io_error, "cannot open for writing: " + path);
  for (const auto& l : session_lines(cfg)) out << l << '\n';
  require(out.good(), Errc::io_error, "write failed: " + path);
}

}  // namespace gtsd
