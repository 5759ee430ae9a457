#pragma once

#include <vector>

#include "vibid/latent.hpp"

namespace vibid {

enum class GuidanceMode { kCfg, kCfgPlusPlus };

struct GuidanceConfig {
  GuidanceMode mode = GuidanceMode::kCfg;
  double scale = 1.0;
  bool dds_enabled = false;
  int dds_iters = 1;

  void validate() const;  // throws InvalidParameter
};

/// uncond + scale * (cond - uncond).
LatentVideo cfg_combine(const LatentVideo& cond, const LatentVideo& uncond, double scale);

/// Linear map from a video to a single frame, with its adjoint.
class FrameOperator {
 public:
  virtual ~FrameOperator() = default;
  virtual Frame apply(const LatentVideo& x) const = 0;
  /// A^T y, shaped like `like`.
  virtual LatentVideo adjoint(const Frame& y, const LatentVideo& like) const = 0;
};

/// A(x) = x[index]; index < 0 counts from the end (-1 is the last frame).
class FrameSelector final : public FrameOperator {
 public:
  explicit FrameSelector(int index = -1) : index_(index) {}
  Frame apply(const LatentVideo& x) const override;
  LatentVideo adjoint(const Frame& y, const LatentVideo& like) const override;

 private:
  std::size_t resolve(const LatentVideo& x) const;
  int index_;
};

/// Dense D x (F*D) matrix acting on vec(x). Row-major coefficients.
class MatrixOperator final : public FrameOperator {
 public:
  MatrixOperator(std::size_t rows, std::size_t cols, std::vector<double> coeffs);
  Frame apply(const LatentVideo& x) const override;
  LatentVideo adjoint(const Frame& y, const LatentVideo& like) const override;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> coeffs_;
};

inline constexpr double kCgResidualFloor = 1e-12;

/// `iters` CGLS iterations on min ||y - A x||^2 from x_init. When `residuals` is
/// given it receives ||y - A x_k|| for k = 0..(iterations actually run).
/// Entries of x whose search direction is exactly zero are never written.
LatentVideo cg_least_squares(const FrameOperator& op, const Frame& y, const LatentVideo& x_init,
                             int iters, std::vector<double>* residuals = nullptr);

/// Last-frame data consistency: CGLS with A = last-frame extractor.
LatentVideo dds_guide(const LatentVideo& x0_hat, const Frame& target, int iters,
                      std::vector<double>* residuals = nullptr);

}  // namespace vibid
