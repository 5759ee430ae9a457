#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vibid {

/// Noise levels indexed by timestep t in [0, T]; sigma(0) == 0 and the
/// sequence is strictly increasing in t.
class SigmaSchedule {
 public:
  explicit SigmaSchedule(std::vector<double> sigmas);

  int steps() const noexcept { return static_cast<int>(sigmas_.size()) - 1; }
  double operator[](int t) const { return sigmas_.at(static_cast<std::size_t>(t)); }
  double max() const noexcept { return sigmas_.back(); }
  std::span<const double> values() const noexcept { return sigmas_; }

 private:
  std::vector<double> sigmas_;
};

struct KarrasParams {
  int steps = 25;
  double sigma_min = 0.002;
  double sigma_max = 700.0;
  double rho = 7.0;
};

SigmaSchedule karras_schedule(int steps, double sigma_min, double sigma_max, double rho);
inline SigmaSchedule karras_schedule(const KarrasParams& p) {
  return karras_schedule(p.steps, p.sigma_min, p.sigma_max, p.rho);
}

struct PreconditionCoeffs {
  double c_skip;
  double c_out;
  double c_in;
  double c_noise;  // -inf at sigma == 0
};

inline constexpr double kDefaultSigmaData = 0.5;

PreconditionCoeffs edm_precondition(double sigma, double sigma_data = kDefaultSigmaData);

}  // namespace vibid
