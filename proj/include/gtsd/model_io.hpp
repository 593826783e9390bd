#pragma once

#include <cstdint>
#include <span>
#include <string>

#include "gtsd/model.hpp"

namespace gtsd {

/// FNV-1a over a byte span; used as the model-file trailer checksum.
uint64_t fnv1a64(std::span<const uint8_t> bytes);

/// Binary model file, little-endian. Layout:
///   magic "GTSD", format version u16,
///   V u32, d u32, L u32, T u32, schedule family u16,
///   hidden u32, trunk_layers u32, time_dim u32, pos_dim u32,
///   V vocabulary entries (u32 byte length + UTF-8 bytes),
///   V*d embedding doubles (row by row),
///   u64 parameter count + denoiser theta doubles (flat layout order),
///   u64 FNV-1a checksum of all preceding bytes.
/// Sender and receiver must share the file byte-identically.
void save_model(const DiffusionModel& model, const std::string& path);
DiffusionModel load_model(const std::string& path);

}  // namespace gtsd
