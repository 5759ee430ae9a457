#include "vibid/denoiser.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "vibid/errors.hpp"

namespace vibid {

Eigen::VectorXd to_eigen(const LatentVideo& v) {
  auto s = v.flat();
  return Eigen::Map<const Eigen::VectorXd>(s.data(), static_cast<Eigen::Index>(s.size()));
}

LatentVideo from_eigen(const Eigen::VectorXd& v, std::size_t frames, std::size_t dims) {
  return LatentVideo(frames, dims, std::vector<double>(v.data(), v.data() + v.size()));
}

namespace {

// Relative eigenvalue cutoff below which a direction counts as outside the support.
constexpr double kEigenCutoff = 1e-9;

void check_shape(const DenoiserModel& m, const LatentVideo& x) {
  if (x.frames() != m.frames() || x.dims() != m.dims())
    throw ShapeMismatch("denoise: input is " + std::to_string(x.frames()) + "x" +
                        std::to_string(x.dims()) + ", model expects " + std::to_string(m.frames()) +
                        "x" + std::to_string(m.dims()));
}

}  // namespace

// ---------------------------------------------------------------------------
// Gaussian models

GaussianVideoModel::Spectral GaussianVideoModel::truncated_eigen(const Eigen::MatrixXd& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov);
  if (es.info() != Eigen::Success) throw NumericalError("covariance eigendecomposition failed");
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double top = ev.size() ? ev.maxCoeff() : 0.0;
  const double cutoff = std::max(kEigenCutoff * top, std::numeric_limits<double>::min());
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < ev.size(); ++i)
    if (ev[i] > cutoff) keep.push_back(i);
  Spectral s;
  s.basis.resize(cov.rows(), static_cast<Eigen::Index>(keep.size()));
  s.values.resize(static_cast<Eigen::Index>(keep.size()));
  for (std::size_t j = 0; j < keep.size(); ++j) {
    s.basis.col(static_cast<Eigen::Index>(j)) = es.eigenvectors().col(keep[j]);
    s.values[static_cast<Eigen::Index>(j)] = ev[keep[j]];
  }
  return s;
}

GaussianVideoModel::GaussianVideoModel(std::size_t frames, std::size_t dims, Eigen::VectorXd mean,
                                       Eigen::MatrixXd covariance, CovarianceKind kind)
    : frames_(frames), dims_(dims), kind_(kind), mean_(std::move(mean)), cov_(std::move(covariance)) {
  const auto n = static_cast<Eigen::Index>(frames * dims);
  if (frames < 1 || dims < 1) throw InvalidParameter("GaussianVideoModel: empty shape");
  if (mean_.size() != n || cov_.rows() != n || cov_.cols() != n)
    throw ShapeMismatch("GaussianVideoModel: mean/covariance size does not match F*D");
  if (!mean_.allFinite() || !cov_.allFinite())
    throw InvalidParameter("GaussianVideoModel: non-finite parameters");
  if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, cov_.cwiseAbs().maxCoeff()))
    throw InvalidParameter("GaussianVideoModel: covariance is not symmetric");
  cov_ = 0.5 * (cov_ + cov_.transpose());

  prior_ = truncated_eigen(cov_);
  if (prior_.values.size() < n) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cov_, Eigen::EigenvaluesOnly);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    if (es.eigenvalues().minCoeff() < -1e-8 * std::max(top, 1.0))
      throw InvalidParameter("GaussianVideoModel: covariance is not positive semidefinite");
  }

  // Condition on frame 0: gain G = cov[:, 0] (cov[0, 0] + ridge I)^-1.
  const auto d = static_cast<Eigen::Index>(dims);
  const Eigen::MatrixXd c_all0 = cov_.leftCols(d);
  Eigen::MatrixXd c00 = cov_.topLeftCorner(d, d);
  c00.diagonal().array() += kRidge;
  frame0_gain_ = c00.ldlt().solve(c_all0.transpose()).transpose();
  Eigen::MatrixXd cond_cov = cov_ - frame0_gain_ * c_all0.transpose();
  cond_cov = 0.5 * (cond_cov + cond_cov.transpose());
  given_frame0_ = truncated_eigen(cond_cov);
}

GaussianVideoModel GaussianVideoModel::point_mass(const LatentVideo& value) {
  const auto n = static_cast<Eigen::Index>(value.size());
  return GaussianVideoModel(value.frames(), value.dims(), to_eigen(value), Eigen::MatrixXd::Zero(n, n),
                            CovarianceKind::kPointMass);
}

GaussianVideoModel GaussianVideoModel::isotropic(const LatentVideo& mean, double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("isotropic: tau must be > 0");
  const auto n = static_cast<Eigen::Index>(mean.size());
  return GaussianVideoModel(mean.frames(), mean.dims(), to_eigen(mean),
                            tau * tau * Eigen::MatrixXd::Identity(n, n), CovarianceKind::kIsotropic);
}

GaussianVideoModel GaussianVideoModel::ar1(const LatentVideo& mean, double tau, double phi) {
  if (!(tau > 0.0)) throw InvalidParameter("ar1: tau must be > 0");
  if (!(phi > -1.0 && phi < 1.0)) throw InvalidParameter("ar1: phi must lie in (-1, 1)");
  const std::size_t F = mean.frames(), D = mean.dims();
  const auto n = static_cast<Eigen::Index>(F * D);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < F; ++i)
    for (std::size_t j = 0; j < F; ++j) {
      const double c = tau * tau * std::pow(phi, static_cast<double>(i > j ? i - j : j - i));
      for (std::size_t k = 0; k < D; ++k)
        cov(static_cast<Eigen::Index>(i * D + k), static_cast<Eigen::Index>(j * D + k)) = c;
    }
  return GaussianVideoModel(F, D, to_eigen(mean), std::move(cov), CovarianceKind::kAr1);
}

GaussianVideoModel GaussianVideoModel::subspace(const LatentVideo& mean, const std::vector<LatentVideo>& basis,
                                                double tau) {
  if (!(tau > 0.0)) throw InvalidParameter("subspace: tau must be > 0");
  if (basis.empty()) throw InvalidParameter("subspace: basis must be non-empty");
  const auto n = static_cast<Eigen::Index>(mean.size());
  Eigen::MatrixXd b(n, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (!basis[j].same_shape(mean)) throw ShapeMismatch("subspace: basis vector shape mismatch");
    b.col(static_cast<Eigen::Index>(j)) = to_eigen(basis[j]);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(b);
  qr.setThreshold(1e-10);
  const auto rank = qr.rank();
  if (rank < b.cols()) throw InvalidParameter("subspace: basis vectors are linearly dependent");
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, rank);
  return GaussianVideoModel(mean.frames(), mean.dims(), to_eigen(mean), tau * tau * q * q.transpose(),
                            CovarianceKind::kSubspace);
}

LatentVideo GaussianVideoModel::posterior_mean(const LatentVideo& x, double sigma, const Frame* c) const {
  check_shape(*this, x);
  if (!(sigma >= 0.0)) throw InvalidParameter("denoise: sigma must be >= 0");
  Eigen::VectorXd m = mean_;
  const Spectral* s = &prior_;
  if (c != nullptr) {
    if (c->dims() != dims_) throw ShapeMismatch("denoise: condition frame dimension mismatch");
    Eigen::VectorXd offset(static_cast<Eigen::Index>(dims_));
    for (std::size_t k = 0; k < dims_; ++k) offset[static_cast<Eigen::Index>(k)] = (*c)[k] - mean_[static_cast<Eigen::Index>(k)];
    m += frame0_gain_ * offset;
    s = &given_frame0_;
  }
  Eigen::VectorXd result = m;
  if (s->values.size() > 0) {
    const double noise = sigma * sigma + kRidge;
    Eigen::VectorXd coeff = s->basis.transpose() * (to_eigen(x) - m);
    coeff.array() *= s->values.array() / (s->values.array() + noise);
    result.noalias() += s->basis * coeff;
  }
  return from_eigen(result, frames_, dims_);
}

DenoisedPair GaussianVideoModel::denoise(const LatentVideo& x, double sigma, const Frame& c) const {
  return {posterior_mean(x, sigma, &c), posterior_mean(x, sigma, nullptr)};
}

LatentVideo gaussian_denoise(const GaussianVideoModel& model, const LatentVideo& x, double sigma,
                             const Frame* c) {
  return model.posterior_mean(x, sigma, c);
}

// ---------------------------------------------------------------------------
// Gaussian mixtures

GmmVideoModel::GmmVideoModel(std::vector<GmmComponent> components) : components_(std::move(components)) {
  if (components_.empty()) throw InvalidParameter("GmmVideoModel: no components");
  frames_ = components_.front().mean.frames();
  dims_ = components_.front().mean.dims();
  double total = 0.0;
  for (const auto& comp : components_) {
    if (comp.mean.frames() != frames_ || comp.mean.dims() != dims_)
      throw ShapeMismatch("GmmVideoModel: component shapes differ");
    if (!(comp.weight > 0.0)) throw InvalidParameter("GmmVideoModel: weights must be > 0");
    if (!(comp.variance >= 0.0)) throw InvalidParameter("GmmVideoModel: variances must be >= 0");
    if (!comp.mean.all_finite()) throw InvalidParameter("GmmVideoModel: non-finite mean");
    total += comp.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw InvalidParameter("GmmVideoModel: weights must sum to 1");
}

LatentVideo GmmVideoModel::posterior_mean(const LatentVideo& x, double sigma, const Frame* c) const {
  check_shape(*this, x);
  if (!(sigma >= 0.0)) throw InvalidParameter("denoise: sigma must be >= 0");
  if (c != nullptr && c->dims() != dims_) throw ShapeMismatch("denoise: condition frame dimension mismatch");

  const std::size_t K = components_.size();
  const std::size_t n = x.size();
  const double s2 = sigma * sigma;
  const double log2pi = std::log(2.0 * std::numbers::pi);
  auto xs = x.flat();

  std::vector<double> logw(K);
  std::vector<LatentVideo> comp_means;
  comp_means.reserve(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& comp = components_[k];
    auto mu = comp.mean.flat();
    double lw = std::log(comp.weight);
    LatentVideo post(frames_, dims_);
    auto p = post.flat();
    for (std::size_t i = 0; i < n; ++i) {
      // Rows of frame 0 are pinned to the condition (prior variance 0) when one is given.
      const bool pinned = c != nullptr && i < dims_;
      double m = mu[i];
      double v = comp.variance;
      if (pinned) {
        const double cv = comp.variance + kRidge;
        const double r = (*c)[i] - mu[i];
        lw += -0.5 * (r * r / cv + std::log(cv) + log2pi);
        m = (*c)[i];
        v = 0.0;
      }
      const double var = v + s2 + kRidge;
      const double r = xs[i] - m;
      lw += -0.5 * (r * r / var + std::log(var) + log2pi);
      p[i] = m + (v / var) * r;
    }
    logw[k] = lw;
    comp_means.push_back(std::move(post));
  }

  const double top = *std::ranges::max_element(logw);
  double z = 0.0;
  for (double& l : logw) {
    l = std::exp(l - top);
    z += l;
  }
  LatentVideo out(frames_, dims_);
  auto o = out.flat();
  for (std::size_t k = 0; k < K; ++k) {
    const double r = logw[k] / z;
    auto p = comp_means[k].flat();
    for (std::size_t i = 0; i < n; ++i) o[i] += r * p[i];
  }
  return out;
}

DenoisedPair GmmVideoModel::denoise(const LatentVideo& x, double sigma, const Frame& c) const {
  return {posterior_mean(x, sigma, &c), posterior_mean(x, sigma, nullptr)};
}

LatentVideo gmm_denoise(const GmmVideoModel& model, const LatentVideo& x, double sigma) {
  return model.posterior_mean(x, sigma, nullptr);
}

// ---------------------------------------------------------------------------
// Preconditioned network wrapper

PreconditionedDenoiser::PreconditionedDenoiser(std::size_t frames, std::size_t dims, RawNetwork raw,
                                               double sigma_data)
    : frames_(frames), dims_(dims), raw_(std::move(raw)), sigma_data_(sigma_data) {
  if (!raw_) throw InvalidParameter("PreconditionedDenoiser: empty network");
}

LatentVideo PreconditionedDenoiser::apply(const LatentVideo& x, double sigma, const Frame* c) const {
  const PreconditionCoeffs k = edm_precondition(sigma, sigma_data_);
  LatentVideo out = raw_(k.c_in * x, k.c_noise, c);
  if (!out.same_shape(x)) throw ShapeMismatch("PreconditionedDenoiser: network output shape mismatch");
  return k.c_skip * x + k.c_out * out;
}

DenoisedPair PreconditionedDenoiser::denoise(const LatentVideo& x, double sigma, const Frame& c) const {
  check_shape(*this, x);
  return {apply(x, sigma, &c), apply(x, sigma, nullptr)};
}

// ---------------------------------------------------------------------------
// Bridge oracle

BridgeStatistics bridge_oracle(const GaussianVideoModel& model, const Frame& start, const Frame& end) {
  const std::size_t F = model.frames(), D = model.dims();
  if (F < 2) throw InvalidParameter("bridge_oracle: need at least two frames");
  if (start.dims() != D || end.dims() != D) throw ShapeMismatch("bridge_oracle: endpoint dimension mismatch");

  const auto d = static_cast<Eigen::Index>(D);
  const auto n = static_cast<Eigen::Index>(F * D);
  std::vector<Eigen::Index> ends, inner;
  for (Eigen::Index i = 0; i < d; ++i) ends.push_back(i);
  for (Eigen::Index i = n - d; i < n; ++i) ends.push_back(i);
  for (Eigen::Index i = d; i < n - d; ++i) inner.push_back(i);

  const Eigen::MatrixXd& cov = model.covariance();
  const Eigen::VectorXd& mu = model.mean();
  Eigen::MatrixXd cee = cov(ends, ends);
  Eigen::MatrixXd cie = cov(inner, ends);
  Eigen::MatrixXd cii = cov(inner, inner);

  BridgeStatistics out;
  {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(cee, Eigen::EigenvaluesOnly);
    const double top = std::max(es.eigenvalues().maxCoeff(), 0.0);
    out.regularized = es.eigenvalues().minCoeff() <= kEigenCutoff * top;
  }
  cee.diagonal().array() += kRidge;
  Eigen::VectorXd e(2 * d);
  for (Eigen::Index k = 0; k < d; ++k) {
    e[k] = start[static_cast<std::size_t>(k)] - mu[k];
    e[d + k] = end[static_cast<std::size_t>(k)] - mu[n - d + k];
  }
  const auto ldlt = cee.ldlt();
  Eigen::VectorXd m = mu(inner) + cie * ldlt.solve(e);
  out.covariance = cii - cie * ldlt.solve(cie.transpose());
  out.covariance = 0.5 * (out.covariance + out.covariance.transpose());
  out.mean = from_eigen(m, F - 2, D);
  return out;
}

}  // namespace vibid
