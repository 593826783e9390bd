#include "gtsd/rng.hpp"

#include <cmath>
#include <numbers>

#include "gtsd/errors.hpp"

namespace gtsd {

namespace {
constexpr uint64_t kGamma = 0x9E3779B97F4A7C15ull;      // splitmix64 increment
constexpr uint64_t kFnvOffset = 0xCBF29CE484222325ull;  // FNV-1a 64
constexpr uint64_t kFnvPrime = 0x00000100000001B3ull;

uint64_t fnv1a(std::string_view s) {
  uint64_t h = kFnvOffset;
  for (unsigned char c : s) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}
}  // namespace

uint64_t CounterRng::mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

uint64_t CounterRng::stream_key(uint64_t seed, std::string_view stream) {
  return mix64(seed ^ fnv1a(stream));
}

CounterRng::CounterRng(uint64_t seed, std::string_view stream)
    : state_(stream_key(seed, stream)) {}

uint64_t CounterRng::next_u64() {
  state_ += kGamma;
  return mix64(state_);
}

uint64_t CounterRng::next_below(uint64_t bound) {
  require(bound > 0, Errc::bad_range, "bound must be positive");
  // Lemire's multiply-shift rejection; exact uniformity over [0, bound).
  unsigned __int128 m = static_cast<unsigned __int128>(next_u64()) * bound;
  auto lo = static_cast<uint64_t>(m);
  if (lo < bound) {
    const uint64_t threshold = (0 - bound) % bound;
    while (lo < threshold) {
      m = static_cast<unsigned __int128>(next_u64()) * bound;
      lo = static_cast<uint64_t>(m);
    }
  }
  return static_cast<uint64_t>(m >> 64);
}

double CounterRng::next_unit() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_gaussian() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = next_unit();
  const double u2 = next_unit();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

}  // namespace gtsd
