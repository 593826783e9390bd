#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gtsd/errors.hpp"

namespace gtsd {

/// Ordered bit sequence with an explicit length. All index encodings are
/// MSB-first.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::vector<uint8_t> bits);

  /// Parses a string of '0'/'1' characters, e.g. "1010".
  static BitString parse(std::string_view s);

  void push_back(uint8_t bit);
  void append(const BitString& other);

  uint8_t operator[](size_t i) const { return bits_[i]; }
  size_t size() const { return bits_.size(); }
  bool empty() const { return bits_.empty(); }

  BitString slice(size_t offset, size_t count) const;

  std::string str() const;

  bool operator==(const BitString& other) const = default;

 private:
  std::vector<uint8_t> bits_;  // each element 0 or 1
};

/// One (prompt block, batch block) pair plus its ordinal in the stream.
struct Segment {
  BitString prompt_block;  // width m_p
  BitString batch_block;   // width m_b
  size_t ordinal = 0;
};

/// Fixed segment geometry: p_c and k are the prompt-table capacity and the
/// batch size; block widths are their base-2 logs.
struct SegmentSpec {
  uint64_t prompt_capacity = 0;  // p_c
  uint64_t batch_size = 0;       // k

  SegmentSpec() = default;
  SegmentSpec(uint64_t p_c, uint64_t k);

  unsigned prompt_bits() const { return m_p_; }  // log2(p_c)
  unsigned batch_bits() const { return m_b_; }   // log2(k)
  unsigned segment_bits() const { return m_p_ + m_b_; }

 private:
  unsigned m_p_ = 0;
  unsigned m_b_ = 0;
};

struct SegmentedBits {
  std::vector<Segment> segments;
  size_t pad_bits = 0;
};

/// First bit_count bits of the payload, MSB-first within each byte.
BitString bits_from_bytes(std::span<const uint8_t> payload, size_t bit_count);

/// Packs bits MSB-first into bytes; the final byte is zero-padded.
std::vector<uint8_t> bytes_from_bits(const BitString& bits);

/// Prepends a 32-bit big-endian count of payload bits.
BitString frame_payload(const BitString& payload);

/// Strips the 32-bit header and returns exactly the declared payload bits;
/// trailing padding is ignored.
BitString unframe_payload(const BitString& framed);

/// Splits B into fixed-width segments, zero-padding the tail.
SegmentedBits segment_bits(const BitString& b, const SegmentSpec& spec);

/// MSB-first binary to unsigned. Width must be at most 64.
uint64_t bits_to_index(const BitString& block);

/// Exact inverse of bits_to_index at the given width.
BitString index_to_bits(uint64_t value, unsigned width);

}  // namespace gtsd
