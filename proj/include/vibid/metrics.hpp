#pragma once

#include <utility>
#include <vector>

#include "vibid/denoiser.hpp"
#include "vibid/latent.hpp"

namespace vibid {

struct MetricReport {
  double endpoint_start_err = 0.0;
  double endpoint_end_err = 0.0;
  double smoothness = 0.0;
  double offmanifold = 0.0;
};

/// (||frame_0 - start||, ||frame_{F-1} - end||).
std::pair<double, double> endpoint_error(const LatentVideo& v, const Conditioning& cond);

/// Distance of vec(v) to the affine support mean + range(cov); 0 for full-support models.
double offmanifold_distance(const LatentVideo& v, const GaussianVideoModel& model);

/// Mean over interior i of ||x_{i+1} - 2 x_i + x_{i-1}||^2. Requires F >= 3.
double smoothness(const LatentVideo& v);

/// (max-abs error of the empirical interior mean, max-abs error of the empirical
/// interior covariance) against the analytic bridge. Requires >= 2 samples.
std::pair<double, double> bridge_divergence(const std::vector<LatentVideo>& samples,
                                            const BridgeStatistics& oracle);

}  // namespace vibid
