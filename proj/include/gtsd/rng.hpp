#pragma once

#include <cstdint>
#include <string_view>

namespace gtsd {

/// Counter-based generator with labeled streams. A stream is fully determined
/// by (seed, label): the i-th output is a mix of key + i*gamma, so sender and
/// receiver derive identical length and latent streams from one shared seed
/// in any call order. Constants are fixed and pinned by golden-value tests.
class CounterRng {
 public:
  CounterRng(uint64_t seed, std::string_view stream);

  uint64_t next_u64();

  /// Uniform draw from [0, bound) without modulo bias. bound must be > 0.
  uint64_t next_below(uint64_t bound);

  /// Uniform double in the open interval (0, 1).
  double next_unit();

  /// Standard normal via Box-Muller; consumes two uniforms per pair and
  /// caches the second value.
  double next_gaussian();

  static uint64_t mix64(uint64_t z);
  static uint64_t stream_key(uint64_t seed, std::string_view stream);

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gtsd
