#pragma once

#include <cstdint>

#include "vibid/latent.hpp"

namespace vibid {

enum class NoisePhase : std::uint32_t { kInitial = 0, kRenoise = 1, kTest = 2 };

/// Counter-based Gaussian stream. Draw n of stream (seed, t, phase) is a pure
/// function of those four values, so runs are reproducible regardless of how
/// seeds are scheduled across threads. Uniforms come from the SplitMix64
/// finalizer applied to a keyed counter; normals from Box-Muller so the output
/// does not depend on the standard library's distribution implementation.
class NoiseStream {
 public:
  NoiseStream(std::uint64_t seed, std::uint64_t step, NoisePhase phase);

  std::uint64_t next_u64() noexcept;
  /// Uniform on the open interval (0, 1).
  double uniform() noexcept;
  double normal() noexcept;

  LatentVideo normal_video(std::size_t frames, std::size_t dims);

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace vibid
