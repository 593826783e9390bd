#include "gtsd/bitstring.hpp"

#include <bit>

namespace gtsd {

BitString::BitString(std::vector<uint8_t> bits) : bits_(std::move(bits)) {
  for (uint8_t b : bits_) require(b == 0 || b == 1, Errc::bad_format, "bit value must be 0 or 1");
}

BitString BitString::parse(std::string_view s) {
  BitString out;
  out.bits_.reserve(s.size());
  for (char c : s) {
    require(c == '0' || c == '1', Errc::bad_format, "bit chars must be 0 or 1");
    out.bits_.push_back(static_cast<uint8_t>(c - '0'));
  }
  return out;
}

void BitString::push_back(uint8_t bit) {
  require(bit == 0 || bit == 1, Errc::bad_format, "bit value must be 0 or 1");
  bits_.push_back(bit);
}

void BitString::append(const BitString& other) {
  bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end());
}

BitString BitString::slice(size_t offset, size_t count) const {
  require(offset + count <= bits_.size(), Errc::index_out_of_range, "slice past end");
  BitString out;
  out.bits_.assign(bits_.begin() + static_cast<ptrdiff_t>(offset),
                   bits_.begin() + static_cast<ptrdiff_t>(offset + count));
  return out;
}

std::string BitString::str() const {
  std::string s;
  s.reserve(bits_.size());
  for (uint8_t b : bits_) s.push_back(static_cast<char>('0' + b));
  return s;
}

SegmentSpec::SegmentSpec(uint64_t p_c, uint64_t k) : prompt_capacity(p_c), batch_size(k) {
  require(p_c >= 2 && std::has_single_bit(p_c), Errc::not_power_of_two,
          "prompt capacity must be a power of two >= 2");
  require(k >= 2 && std::has_single_bit(k), Errc::not_power_of_two,
          "batch size must be a power of two >= 2");
  m_p_ = static_cast<unsigned>(std::countr_zero(p_c));
  m_b_ = static_cast<unsigned>(std::countr_zero(k));
}

BitString bits_from_bytes(std::span<const uint8_t> payload, size_t bit_count) {
  require(bit_count <= payload.size() * 8, Errc::bit_count_overflow,
          "bit_count exceeds available bits");
  BitString out;
  for (size_t i = 0; i < bit_count; ++i) {
    uint8_t byte = payload[i / 8];
    out.push_back(static_cast<uint8_t>((byte >> (7 - i % 8)) & 1u));
  }
  return out;
}

std::vector<uint8_t> bytes_from_bits(const BitString& bits) {
  std::vector<uint8_t> out((bits.size() + 7) / 8, 0);
  for (size_t i = 0; i < bits.size(); ++i) {
    if (bits[i]) out[i / 8] |= static_cast<uint8_t>(1u << (7 - i % 8));
  }
  return out;
}

BitString frame_payload(const BitString& payload) {
  require(payload.size() < (uint64_t{1} << 32), Errc::payload_too_long,
          "payload must be shorter than 2^32 bits");
  BitString framed = index_to_bits(payload.size(), 32);
  framed.append(payload);
  return framed;
}

BitString unframe_payload(const BitString& framed) {
  require(framed.size() >= 32, Errc::truncated_frame, "frame shorter than its header");
  uint64_t declared = bits_to_index(framed.slice(0, 32));
  require(framed.size() - 32 >= declared, Errc::truncated_frame,
          "declared payload length exceeds available bits");
  return framed.slice(32, declared);
}

SegmentedBits segment_bits(const BitString& b, const SegmentSpec& spec) {
  const size_t width = spec.segment_bits();
  SegmentedBits out;
  if (b.empty()) return out;
  const size_t count = (b.size() + width - 1) / width;
  out.pad_bits = count * width - b.size();

  BitString padded = b;
  for (size_t i = 0; i < out.pad_bits; ++i) padded.push_back(0);

  out.segments.reserve(count);
  for (size_t i = 0; i < count; ++i) {
    Segment seg;
    seg.prompt_block = padded.slice(i * width, spec.prompt_bits());
    seg.batch_block = padded.slice(i * width + spec.prompt_bits(), spec.batch_bits());
    seg.ordinal = i;
    out.segments.push_back(std::move(seg));
  }
  return out;
}

uint64_t bits_to_index(const BitString& block) {
  require(block.size() <= 64, Errc::width_overflow, "block wider than 64 bits");
  uint64_t v = 0;
  for (size_t i = 0; i < block.size(); ++i) v = (v << 1) | block[i];
  return v;
}

BitString index_to_bits(uint64_t value, unsigned width) {
  require(width <= 64, Errc::width_overflow, "width beyond 64 bits");
  if (width < 64) {
    require(value < (uint64_t{1} << width), Errc::value_overflow, "value does not fit width");
  }
  BitString out;
  for (unsigned i = 0; i < width; ++i) {
    out.push_back(static_cast<uint8_t>((value >> (width - 1 - i)) & 1u));
  }
  return out;
}

}  // namespace gtsd
