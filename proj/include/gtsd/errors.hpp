#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gtsd {

enum class Errc {
  bit_count_overflow,
  payload_too_long,
  truncated_frame,
  width_overflow,
  value_overflow,
  bad_arity,
  not_power_of_two,
  duplicate_prompt,
  duplicate_token,
  unknown_token,
  index_out_of_range,
  prompt_not_found,
  ambiguous_prompt,
  table_too_small,
  bad_steps,
  shape_mismatch,
  step_out_of_range,
  degenerate_alpha,
  bad_step_sequence,
  empty_corpus,
  length_overflow,
  empty_sentence,
  bad_range,
  collision_detected,
  table_mismatch,
  model_missing,
  length_mismatch,
  not_enough_positions,
  bad_counts,
  empty_set,
  degenerate_variance,
  io_error,
  bad_format,
};

std::string_view errc_name(Errc c);

/// Exception carrying a stable error code; tests match on code(), operators
/// read what().
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& msg)
      : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}
  Errc code() const { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& msg) { throw Error(code, msg); }

inline void require(bool ok, Errc code, const std::string& msg) {
  if (!ok) fail(code, msg);
}

}  // namespace gtsd
