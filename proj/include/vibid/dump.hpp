#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "vibid/latent.hpp"

namespace vibid {

inline constexpr std::uint16_t kVbdsVersion = 1;

/// Raw tensor dump: "VBDS", u16 version, u32 F, u32 D, then F*D float64 values,
/// frame-major, all little-endian.
std::vector<std::uint8_t> encode_vbds(const LatentVideo& v);
LatentVideo decode_vbds(const std::vector<std::uint8_t>& bytes);

void write_vbds(const std::filesystem::path& path, const LatentVideo& v);
LatentVideo read_vbds(const std::filesystem::path& path);

/// RFC 4180 field quoting: fields containing ',', '"', CR or LF are quoted and
/// embedded quotes doubled.
std::string csv_field(std::string_view field);
void write_csv_row(std::ostream& os, const std::vector<std::string>& fields);

/// Shortest round-trip decimal form, locale independent.
std::string format_double(double v);

}  // namespace vibid
