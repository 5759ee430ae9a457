#include "vibid/dump.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <ostream>

#include "vibid/errors.hpp"

namespace vibid {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'V', 'B', 'D', 'S'};
constexpr std::size_t kHeaderSize = 4 + 2 + 4 + 4;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<std::uint8_t>(value >> (8 * i)));
}

template <typename T>
T get_le(const std::vector<std::uint8_t>& in, std::size_t offset) {
  T value = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(in[offset + i]) << (8 * i);
  return value;
}

}  // namespace

std::vector<std::uint8_t> encode_vbds(const LatentVideo& v) {
  std::vector<std::uint8_t> out(kMagic.begin(), kMagic.end());
  out.reserve(kHeaderSize + 8 * v.size());
  put_le<std::uint16_t>(out, kVbdsVersion);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.frames()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(v.dims()));
  for (double x : v.flat()) put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  return out;
}

LatentVideo decode_vbds(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kHeaderSize || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
    throw IoError("VBDS: bad magic");
  const auto version = get_le<std::uint16_t>(bytes, 4);
  if (version != kVbdsVersion) throw IoError("VBDS: unsupported version " + std::to_string(version));
  const auto frames = get_le<std::uint32_t>(bytes, 6);
  const auto dims = get_le<std::uint32_t>(bytes, 10);
  const std::size_t n = static_cast<std::size_t>(frames) * dims;
  if (bytes.size() != kHeaderSize + 8 * n) throw IoError("VBDS: payload size does not match header");
  std::vector<double> data(n);
  for (std::size_t i = 0; i < n; ++i)
    data[i] = std::bit_cast<double>(get_le<std::uint64_t>(bytes, kHeaderSize + 8 * i));
  return LatentVideo(frames, dims, std::move(data));
}

void write_vbds(const std::filesystem::path& path, const LatentVideo& v) {
  const auto bytes = encode_vbds(v);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw IoError("failed writing " + path.string());
}

LatentVideo read_vbds(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_vbds(bytes);
}

std::string csv_field(std::string_view field) {
  if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
  std::string out = "\"";
  for (char ch : field) {
    if (ch == '"') out += '"';
    out += ch;
  }
  out += '"';
  return out;
}

void write_csv_row(std::ostream& os, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) os << ',';
    os << csv_field(fields[i]);
  }
  os << "\r\n";
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 32> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace vibid
