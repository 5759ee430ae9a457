#include "vibid/schedule.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "vibid/errors.hpp"

namespace vibid {

SigmaSchedule::SigmaSchedule(std::vector<double> sigmas) : sigmas_(std::move(sigmas)) {
  if (sigmas_.size() < 2) throw InvalidParameter("schedule needs at least one nonzero level");
  if (sigmas_.front() != 0.0) throw InvalidParameter("schedule must start at sigma_0 = 0");
  for (std::size_t t = 1; t < sigmas_.size(); ++t) {
    if (!std::isfinite(sigmas_[t]) || !(sigmas_[t] > sigmas_[t - 1]))
      throw InvalidParameter("schedule is not strictly increasing at t = " + std::to_string(t));
  }
}

SigmaSchedule karras_schedule(int steps, double sigma_min, double sigma_max, double rho) {
  if (steps < 1) throw InvalidParameter("karras_schedule: steps must be >= 1");
  if (!(sigma_min > 0.0) || !(sigma_max > sigma_min) || !std::isfinite(sigma_max))
    throw InvalidParameter("karras_schedule: need 0 < sigma_min < sigma_max");
  if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidParameter("karras_schedule: rho must be > 0");

  // sigmas[t] for t = 1..T; ramp index i = T - t runs from sigma_max (i = 0) to sigma_min (i = T-1).
  std::vector<double> sigmas(static_cast<std::size_t>(steps) + 1, 0.0);
  const double hi = std::pow(sigma_max, 1.0 / rho);
  const double lo = std::pow(sigma_min, 1.0 / rho);
  for (int t = 1; t <= steps; ++t) {
    const int i = steps - t;
    if (steps == 1) {
      sigmas[t] = sigma_max;
    } else if (i == 0) {
      sigmas[t] = sigma_max;
    } else if (i == steps - 1) {
      sigmas[t] = sigma_min;
    } else {
      const double frac = static_cast<double>(i) / static_cast<double>(steps - 1);
      sigmas[t] = std::pow(hi + frac * (lo - hi), rho);
    }
  }
  return SigmaSchedule(std::move(sigmas));
}

PreconditionCoeffs edm_precondition(double sigma, double sigma_data) {
  if (!(sigma >= 0.0)) throw InvalidParameter("edm_precondition: sigma must be >= 0");
  if (!(sigma_data > 0.0)) throw InvalidParameter("edm_precondition: sigma_data must be > 0");
  const double s2 = sigma * sigma;
  const double d2 = sigma_data * sigma_data;
  if (std::isinf(sigma)) {
    return {0.0, sigma_data, 0.0, std::numeric_limits<double>::infinity()};
  }
  const double root = std::sqrt(s2 + d2);
  return {
      d2 / (s2 + d2),
      sigma * sigma_data / root,
      1.0 / root,
      sigma > 0.0 ? 0.25 * std::log(sigma) : -std::numeric_limits<double>::infinity(),
  };
}

}  // namespace vibid
