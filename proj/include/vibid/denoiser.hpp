#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "vibid/latent.hpp"
#include "vibid/schedule.hpp"

namespace vibid {

inline constexpr double kRidge = 1e-10;

struct DenoisedPair {
  LatentVideo cond;    // estimate of x0 given frame 0 == c
  LatentVideo uncond;  // estimate under the unconditioned prior
};

/// Denoiser contract: D(x; sigma, c) -> (x0_hat_c, x0_hat_null).
/// Implementations must be deterministic and safe to call concurrently.
class DenoiserModel {
 public:
  virtual ~DenoiserModel() = default;
  virtual std::size_t frames() const = 0;
  virtual std::size_t dims() const = 0;
  virtual DenoisedPair denoise(const LatentVideo& x, double sigma, const Frame& c) const = 0;
};

enum class CovarianceKind { kPointMass, kIsotropic, kAr1, kSubspace, kDense };

/// Gaussian prior over vec(x0) (frame-major) with exact posterior means.
///
/// Posterior means use eigendecompositions of the prior covariance and of the
/// covariance conditioned on frame 0, computed once at construction. Eigenvalues
/// below a relative cutoff are treated as exact zeros so that degenerate models
/// (point mass, subspace) return estimates exactly on their support.
class GaussianVideoModel final : public DenoiserModel {
 public:
  GaussianVideoModel(std::size_t frames, std::size_t dims, Eigen::VectorXd mean,
                     Eigen::MatrixXd covariance, CovarianceKind kind = CovarianceKind::kDense);

  static GaussianVideoModel point_mass(const LatentVideo& value);
  static GaussianVideoModel isotropic(const LatentVideo& mean, double tau);
  /// cov(frame_i[d], frame_j[d]) = tau^2 * phi^|i-j|, independent across d.
  static GaussianVideoModel ar1(const LatentVideo& mean, double tau, double phi);
  /// Prior tau^2 * Q Q^T where Q is an orthonormal basis of span(basis).
  static GaussianVideoModel subspace(const LatentVideo& mean, const std::vector<LatentVideo>& basis,
                                     double tau);

  std::size_t frames() const override { return frames_; }
  std::size_t dims() const override { return dims_; }
  DenoisedPair denoise(const LatentVideo& x, double sigma, const Frame& c) const override;

  /// E[x0 | x_t = x] under the prior, or with frame 0 pinned to *c when given.
  LatentVideo posterior_mean(const LatentVideo& x, double sigma, const Frame* c) const;

  CovarianceKind kind() const noexcept { return kind_; }
  const Eigen::VectorXd& mean() const noexcept { return mean_; }
  const Eigen::MatrixXd& covariance() const noexcept { return cov_; }
  /// Orthonormal basis of range(covariance); zero columns for a point mass.
  const Eigen::MatrixXd& support_basis() const noexcept { return prior_.basis; }
  bool full_support() const noexcept {
    return static_cast<std::size_t>(prior_.basis.cols()) == frames_ * dims_;
  }

 private:
  struct Spectral {
    Eigen::MatrixXd basis;   // n x r eigenvectors with non-negligible eigenvalue
    Eigen::VectorXd values;  // r eigenvalues
  };
  static Spectral truncated_eigen(const Eigen::MatrixXd& cov);

  std::size_t frames_;
  std::size_t dims_;
  CovarianceKind kind_;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd cov_;
  Spectral prior_;
  Eigen::MatrixXd frame0_gain_;  // n x D regression of vec(x0) on frame 0
  Spectral given_frame0_;
};

/// Free-function form of the Gaussian posterior mean.
LatentVideo gaussian_denoise(const GaussianVideoModel& model, const LatentVideo& x, double sigma,
                             const Frame* c = nullptr);

struct GmmComponent {
  double weight;
  LatentVideo mean;
  double variance;  // isotropic s_k^2 >= 0
};

/// Mixture of isotropic Gaussians. Responsibilities are evaluated in the log
/// domain with max subtraction.
class GmmVideoModel final : public DenoiserModel {
 public:
  explicit GmmVideoModel(std::vector<GmmComponent> components);

  std::size_t frames() const override { return frames_; }
  std::size_t dims() const override { return dims_; }
  DenoisedPair denoise(const LatentVideo& x, double sigma, const Frame& c) const override;

  LatentVideo posterior_mean(const LatentVideo& x, double sigma, const Frame* c) const;
  const std::vector<GmmComponent>& components() const noexcept { return components_; }

 private:
  std::vector<GmmComponent> components_;
  std::size_t frames_;
  std::size_t dims_;
};

LatentVideo gmm_denoise(const GmmVideoModel& model, const LatentVideo& x, double sigma);

/// Network-style wrapper: D(x) = c_skip x + c_out F(c_in x; c_noise, c).
class PreconditionedDenoiser final : public DenoiserModel {
 public:
  // raw(scaled_x, c_noise, condition) -> network output; condition is null for the unconditional pass.
  using RawNetwork =
      std::function<LatentVideo(const LatentVideo& scaled_x, double c_noise, const Frame* condition)>;

  PreconditionedDenoiser(std::size_t frames, std::size_t dims, RawNetwork raw,
                         double sigma_data = kDefaultSigmaData);

  std::size_t frames() const override { return frames_; }
  std::size_t dims() const override { return dims_; }
  DenoisedPair denoise(const LatentVideo& x, double sigma, const Frame& c) const override;

 private:
  LatentVideo apply(const LatentVideo& x, double sigma, const Frame* c) const;

  std::size_t frames_;
  std::size_t dims_;
  RawNetwork raw_;
  double sigma_data_;
};

struct BridgeStatistics {
  LatentVideo mean;            // interior frames 1..F-2, shape (F-2) x D
  Eigen::MatrixXd covariance;  // ((F-2)D)^2
  bool regularized = false;    // endpoint block needed the ridge to be solvable
};

/// Law of interior frames given frame 0 == start and frame F-1 == end.
BridgeStatistics bridge_oracle(const GaussianVideoModel& model, const Frame& start, const Frame& end);

Eigen::VectorXd to_eigen(const LatentVideo& v);
LatentVideo from_eigen(const Eigen::VectorXd& v, std::size_t frames, std::size_t dims);

}  // namespace vibid
