#include "vibid/rng.hpp"

#include <cmath>
#include <numbers>

namespace vibid {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

NoiseStream::NoiseStream(std::uint64_t seed, std::uint64_t step, NoisePhase phase) {
  std::uint64_t k = splitmix64(seed);
  k = splitmix64(k ^ step);
  k = splitmix64(k ^ static_cast<std::uint64_t>(phase));
  key_ = k;
}

std::uint64_t NoiseStream::next_u64() noexcept {
  return splitmix64(key_ + 0xD1B54A32D192ED03ULL * counter_++);
}

double NoiseStream::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double NoiseStream::normal() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double theta = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(theta);
  has_spare_ = true;
  return r * std::cos(theta);
}

LatentVideo NoiseStream::normal_video(std::size_t frames, std::size_t dims) {
  LatentVideo v(frames, dims);
  for (double& x : v.flat()) x = normal();
  return v;
}

}  // namespace vibid
