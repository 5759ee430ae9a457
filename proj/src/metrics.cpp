#include "vibid/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "vibid/errors.hpp"

namespace vibid {

std::pair<double, double> endpoint_error(const LatentVideo& v, const Conditioning& cond) {
  if (v.frames() == 0 || cond.start.dims() != v.dims() || cond.end.dims() != v.dims())
    throw ShapeMismatch("endpoint_error: conditioning does not match the video");
  auto dist = [](std::span<const double> a, const Frame& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(acc);
  };
  return {dist(v.frame(0), cond.start), dist(v.frame(v.frames() - 1), cond.end)};
}

double offmanifold_distance(const LatentVideo& v, const GaussianVideoModel& model) {
  if (v.frames() != model.frames() || v.dims() != model.dims())
    throw ShapeMismatch("offmanifold_distance: shape mismatch");
  if (model.full_support()) return 0.0;
  const Eigen::VectorXd d = to_eigen(v) - model.mean();
  const Eigen::MatrixXd& q = model.support_basis();
  const Eigen::VectorXd perp = d - q * (q.transpose() * d);
  return perp.norm();
}

double smoothness(const LatentVideo& v) {
  if (v.frames() < 3) throw InvalidParameter("smoothness: need at least three frames");
  double total = 0.0;
  for (std::size_t i = 1; i + 1 < v.frames(); ++i) {
    auto a = v.frame(i - 1), b = v.frame(i), c = v.frame(i + 1);
    for (std::size_t k = 0; k < v.dims(); ++k) {
      const double d2 = c[k] - 2.0 * b[k] + a[k];
      total += d2 * d2;
    }
  }
  return total / static_cast<double>(v.frames() - 2);
}

std::pair<double, double> bridge_divergence(const std::vector<LatentVideo>& samples,
                                            const BridgeStatistics& oracle) {
  if (samples.size() < 2) throw InvalidParameter("bridge_divergence: need at least two samples");
  const std::size_t inner_frames = oracle.mean.frames();
  const std::size_t D = oracle.mean.dims();
  const auto n = static_cast<Eigen::Index>(inner_frames * D);
  const auto N = static_cast<double>(samples.size());

  Eigen::VectorXd mean = Eigen::VectorXd::Zero(n);
  Eigen::MatrixXd data(n, static_cast<Eigen::Index>(samples.size()));
  for (std::size_t s = 0; s < samples.size(); ++s) {
    const LatentVideo& v = samples[s];
    if (v.frames() != inner_frames + 2 || v.dims() != D)
      throw ShapeMismatch("bridge_divergence: sample shape does not match the oracle");
    for (std::size_t f = 1; f + 1 < v.frames(); ++f)
      for (std::size_t k = 0; k < D; ++k)
        data(static_cast<Eigen::Index>((f - 1) * D + k), static_cast<Eigen::Index>(s)) = v(f, k);
  }
  mean = data.rowwise().mean();
  Eigen::MatrixXd centered = data.colwise() - mean;
  Eigen::MatrixXd cov = centered * centered.transpose() / (N - 1.0);

  const double mean_err = n ? (mean - to_eigen(oracle.mean)).cwiseAbs().maxCoeff() : 0.0;
  const double cov_err = n ? (cov - oracle.covariance).cwiseAbs().maxCoeff() : 0.0;
  return {mean_err, cov_err};
}

}  // namespace vibid
