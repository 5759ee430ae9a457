#include "vibid/guidance.hpp"

#include <cmath>
#include <string>

#include "vibid/errors.hpp"

namespace vibid {

void GuidanceConfig::validate() const {
  if (!std::isfinite(scale) || scale < 0.0) throw InvalidParameter("guidance scale must be finite and >= 0");
  if (mode == GuidanceMode::kCfgPlusPlus && scale > 1.0)
    throw InvalidParameter("CFG++ guidance scale must lie in [0, 1]");
  if (dds_iters < 0) throw InvalidParameter("dds_iters must be >= 0");
}

LatentVideo cfg_combine(const LatentVideo& cond, const LatentVideo& uncond, double scale) {
  if (!cond.same_shape(uncond)) throw ShapeMismatch("cfg_combine: shape mismatch");
  if (scale == 1.0) return cond;
  if (scale == 0.0) return uncond;
  LatentVideo out(cond.frames(), cond.dims());
  auto c = cond.flat(), u = uncond.flat();
  auto o = out.flat();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = u[i] + scale * (c[i] - u[i]);
  return out;
}

// ---------------------------------------------------------------------------

std::size_t FrameSelector::resolve(const LatentVideo& x) const {
  const auto f = static_cast<long long>(x.frames());
  const long long i = index_ < 0 ? f + index_ : index_;
  if (i < 0 || i >= f) throw ShapeMismatch("FrameSelector: index out of range");
  return static_cast<std::size_t>(i);
}

Frame FrameSelector::apply(const LatentVideo& x) const { return x.frame_copy(resolve(x)); }

LatentVideo FrameSelector::adjoint(const Frame& y, const LatentVideo& like) const {
  if (y.dims() != like.dims()) throw ShapeMismatch("FrameSelector: frame dimension mismatch");
  LatentVideo out(like.frames(), like.dims());
  out.set_frame(resolve(like), y);
  return out;
}

MatrixOperator::MatrixOperator(std::size_t rows, std::size_t cols, std::vector<double> coeffs)
    : rows_(rows), cols_(cols), coeffs_(std::move(coeffs)) {
  if (coeffs_.size() != rows_ * cols_) throw ShapeMismatch("MatrixOperator: coefficient count");
}

Frame MatrixOperator::apply(const LatentVideo& x) const {
  if (x.size() != cols_) throw ShapeMismatch("MatrixOperator: input size");
  Frame out(rows_);
  auto v = x.flat();
  for (std::size_t r = 0; r < rows_; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols_; ++c) acc += coeffs_[r * cols_ + c] * v[c];
    out[r] = acc;
  }
  return out;
}

LatentVideo MatrixOperator::adjoint(const Frame& y, const LatentVideo& like) const {
  if (like.size() != cols_ || y.dims() != rows_) throw ShapeMismatch("MatrixOperator: adjoint shape");
  LatentVideo out(like.frames(), like.dims());
  auto o = out.flat();
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) o[c] += coeffs_[r * cols_ + c] * y[r];
  return out;
}

// ---------------------------------------------------------------------------

namespace {

Frame residual(const FrameOperator& op, const Frame& y, const LatentVideo& x) {
  Frame ax = op.apply(x);
  if (ax.dims() != y.dims()) throw ShapeMismatch("cg_least_squares: target dimension mismatch");
  for (std::size_t i = 0; i < y.dims(); ++i) ax[i] = y[i] - ax[i];
  return ax;
}

}  // namespace

LatentVideo cg_least_squares(const FrameOperator& op, const Frame& y, const LatentVideo& x_init, int iters,
                             std::vector<double>* residuals) {
  if (iters < 0) throw InvalidParameter("cg_least_squares: iteration count must be >= 0");
  LatentVideo x = x_init;
  Frame r = residual(op, y, x);
  double rnorm = std::sqrt(squared_norm(r.values()));
  if (residuals) {
    residuals->clear();
    residuals->push_back(rnorm);
  }
  if (iters == 0 || rnorm < kCgResidualFloor) return x;

  LatentVideo s = op.adjoint(r, x);
  LatentVideo p = s;
  double gamma = squared_norm(s.flat());

  for (int k = 0; k < iters; ++k) {
    if (rnorm < kCgResidualFloor || gamma == 0.0) break;
    const Frame q = op.apply(p);
    const double qq = squared_norm(q.values());
    if (qq == 0.0) break;
    const double alpha = gamma / qq;
    auto xs = x.flat();
    auto ps = p.flat();
    for (std::size_t i = 0; i < xs.size(); ++i)
      if (ps[i] != 0.0) xs[i] += alpha * ps[i];
    for (std::size_t i = 0; i < r.dims(); ++i) r[i] -= alpha * q[i];
    rnorm = std::sqrt(squared_norm(r.values()));
    if (residuals) residuals->push_back(rnorm);

    s = op.adjoint(r, x);
    const double gamma_next = squared_norm(s.flat());
    const double beta = gamma_next / gamma;
    gamma = gamma_next;
    auto ss = s.flat();
    for (std::size_t i = 0; i < ps.size(); ++i) ps[i] = ss[i] + beta * ps[i];
  }
  return x;
}

LatentVideo dds_guide(const LatentVideo& x0_hat, const Frame& target, int iters, std::vector<double>* residuals) {
  return cg_least_squares(FrameSelector(-1), target, x0_hat, iters, residuals);
}

}  // namespace vibid
