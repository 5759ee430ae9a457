#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "vibid/denoiser.hpp"
#include "vibid/errors.hpp"

using namespace vibid;

namespace {

LatentVideo random_video(std::mt19937_64& gen, std::size_t F, std::size_t D, double scale = 1.0) {
  std::normal_distribution<double> n(0.0, scale);
  LatentVideo v(F, D);
  for (double& x : v.flat()) x = n(gen);
  return v;
}

// Brute-force E[x0 | x] for a 1-D Gaussian mixture: trapezoid rule on a wide grid.
double gmm_quadrature(const std::vector<double>& w, const std::vector<double>& mu,
                      const std::vector<double>& s2, double x, double sigma) {
  auto density = [&](double x0) {
    double p = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k)
      p += w[k] * std::exp(-0.5 * (x0 - mu[k]) * (x0 - mu[k]) / s2[k]) / std::sqrt(2 * std::numbers::pi * s2[k]);
    return p * std::exp(-0.5 * (x - x0) * (x - x0) / (sigma * sigma));
  };
  const double lo = -20.0, hi = 20.0;
  const int n = 400000;
  const double h = (hi - lo) / n;
  double num = 0.0, den = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double x0 = lo + h * i;
    const double wt = (i == 0 || i == n) ? 0.5 : 1.0;
    const double p = density(x0) * wt;
    num += x0 * p;
    den += p;
  }
  return num / den;
}

}  // namespace

TEST_CASE("point mass returns the atom") {
  const LatentVideo v{{1, -2}, {3, 4}, {0.5, 0.25}};
  const auto m = GaussianVideoModel::point_mass(v);
  std::mt19937_64 gen(1);
  for (double s : {1e-3, 0.5, 10.0, 700.0}) {
    const auto x = random_video(gen, 3, 2, 5.0);
    CHECK(max_abs_diff(gaussian_denoise(m, x, s), v) < 1e-12);
    // A consistent condition (v's own frame 0) also returns v.
    const auto pair = m.denoise(x, s, v.frame_copy(0));
    CHECK(max_abs_diff(pair.cond, v) < 1e-12);
    CHECK(max_abs_diff(pair.uncond, v) < 1e-12);
  }
}

TEST_CASE("isotropic posterior mean: closed form") {
  const LatentVideo mu{{0.5, -1.0}, {2.0, 0.0}};
  const double tau = 1.3;
  const auto m = GaussianVideoModel::isotropic(mu, tau);
  std::mt19937_64 gen(2);
  for (double s : {0.01, 0.4, 1.0, 7.0}) {
    const auto x = random_video(gen, 2, 2, 3.0);
    const auto got = gaussian_denoise(m, x, s);
    const double g = tau * tau / (tau * tau + s * s);
    for (std::size_t i = 0; i < x.size(); ++i)
      CHECK(got.flat()[i] == doctest::Approx(mu.flat()[i] + g * (x.flat()[i] - mu.flat()[i])).epsilon(1e-9));
  }
}

TEST_CASE("isotropic posterior mean: importance-weighted Monte Carlo") {
  // Draw x0 from the prior and weight each draw by the likelihood of the observed x.
  const double mu = 0.7, tau = 1.1, sigma = 0.9, x = -0.4;
  const auto m = GaussianVideoModel::isotropic(LatentVideo{{mu}}, tau);
  std::mt19937_64 gen(3);
  std::normal_distribution<double> prior(mu, tau);
  double num = 0.0, den = 0.0;
  for (int i = 0; i < 400000; ++i) {
    const double x0 = prior(gen);
    const double w = std::exp(-0.5 * (x - x0) * (x - x0) / (sigma * sigma));
    num += w * x0;
    den += w;
  }
  CHECK(gaussian_denoise(m, LatentVideo{{x}}, sigma)(0, 0) == doctest::Approx(num / den).epsilon(0.01));
}

TEST_CASE("sigma limits") {
  std::mt19937_64 gen(4);
  const auto mu = random_video(gen, 5, 2);
  const auto m = GaussianVideoModel::ar1(mu, 1.0, 0.8);
  const auto x = random_video(gen, 5, 2, 2.0);
  SUBCASE("huge sigma returns the prior mean") {
    CHECK(max_abs_diff(gaussian_denoise(m, x, 1e9), mu) < 1e-9);
  }
  SUBCASE("huge sigma with a condition returns the conditional mean") {
    const Frame c{1.5, -0.5};
    const auto got = gaussian_denoise(m, x, 1e9, &c);
    // AR(1) per dimension: E[x_i | x_0 = c] = mu_i + phi^i (c - mu_0).
    for (std::size_t i = 0; i < 5; ++i)
      for (std::size_t d = 0; d < 2; ++d)
        CHECK(got(i, d) == doctest::Approx(mu(i, d) + std::pow(0.8, double(i)) * (c[d] - mu(0, d))).epsilon(1e-8));
  }
  SUBCASE("tiny sigma returns x on a full-support model") {
    CHECK(max_abs_diff(gaussian_denoise(m, x, 1e-7), x) < 1e-6);
  }
  SUBCASE("conditioned estimate pins frame 0") {
    const Frame c{0.25, 3.0};
    for (double s : {1e-3, 1.0, 100.0}) {
      const auto got = gaussian_denoise(m, x, s, &c);
      CHECK(got(0, 0) == doctest::Approx(0.25).epsilon(1e-9));
      CHECK(got(0, 1) == doctest::Approx(3.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("subspace model output stays on the support") {
  std::mt19937_64 gen(5);
  const std::size_t F = 6, D = 3;
  const auto mu = random_video(gen, F, D);
  std::vector<LatentVideo> basis{random_video(gen, F, D), random_video(gen, F, D)};
  const auto m = GaussianVideoModel::subspace(mu, basis, 1.5);
  CHECK_FALSE(m.full_support());
  CHECK(m.support_basis().cols() == 2);
  const Eigen::MatrixXd& Q = m.support_basis();
  for (double s : {1e-4, 0.3, 2.0, 50.0}) {
    const auto x = random_video(gen, F, D, 4.0);
    const Eigen::VectorXd r = to_eigen(gaussian_denoise(m, x, s)) - m.mean();
    CHECK((r - Q * (Q.transpose() * r)).norm() < 1e-8);
  }
  CHECK_THROWS_AS(GaussianVideoModel::subspace(mu, {basis[0], 2.0 * basis[0]}, 1.0), InvalidParameter);
}

TEST_CASE("GMM with one component equals the isotropic Gaussian") {
  std::mt19937_64 gen(6);
  const auto mu = random_video(gen, 3, 2);
  const double tau = 0.8;
  const GmmVideoModel gmm({GmmComponent{1.0, mu, tau * tau}});
  const auto iso = GaussianVideoModel::isotropic(mu, tau);
  for (double s : {0.05, 1.0, 20.0}) {
    const auto x = random_video(gen, 3, 2, 2.0);
    CHECK(max_abs_diff(gmm_denoise(gmm, x, s), gaussian_denoise(iso, x, s)) < 1e-9);
  }
}

TEST_CASE("GMM symmetric components put equidistant inputs on the axis") {
  const GmmVideoModel gmm({GmmComponent{0.5, LatentVideo{{-1, 2}}, 0.3}, GmmComponent{0.5, LatentVideo{{1, 2}}, 0.3}});
  for (double s : {0.1, 1.0, 5.0}) {
    const auto out = gmm_denoise(gmm, LatentVideo{{0.0, -4.0}}, s);
    CHECK(std::abs(out(0, 0)) < 1e-12);
  }
}

TEST_CASE("GMM two components against grid quadrature") {
  const std::vector<double> w{0.3, 0.7}, mu{-1.0, 2.0}, s2{0.25, 0.5};
  const GmmVideoModel gmm(
      {GmmComponent{w[0], LatentVideo{{mu[0]}}, s2[0]}, GmmComponent{w[1], LatentVideo{{mu[1]}}, s2[1]}});
  const double oracle = gmm_quadrature(w, mu, s2, 0.4, 0.8);
  // Independently frozen value of the same integral.
  CHECK(oracle == doctest::Approx(0.6669216873274925).epsilon(1e-9));
  CHECK(gmm_denoise(gmm, LatentVideo{{0.4}}, 0.8)(0, 0) == doctest::Approx(oracle).epsilon(1e-8));
  for (double x : {-3.0, -0.5, 0.0, 1.0, 5.0})
    for (double s : {0.2, 1.0, 3.0})
      CHECK(gmm_denoise(gmm, LatentVideo{{x}}, s)(0, 0) == doctest::Approx(gmm_quadrature(w, mu, s2, x, s)).epsilon(1e-7));
}

TEST_CASE("GMM point-mass components stay in the convex hull of their means") {
  const GmmVideoModel gmm({GmmComponent{0.2, LatentVideo{{-1}, {0}}, 0.0}, GmmComponent{0.8, LatentVideo{{1}, {0}}, 0.0}});
  std::mt19937_64 gen(7);
  for (int i = 0; i < 100; ++i) {
    const auto x = random_video(gen, 2, 1, 3.0);
    const auto out = gmm_denoise(gmm, x, 0.5 + i * 0.1);
    CHECK(out(0, 0) >= -1.0);
    CHECK(out(0, 0) <= 1.0);
    CHECK(out(1, 0) == 0.0);
  }
  // Extreme separation must not underflow into NaN.
  CHECK(gmm_denoise(gmm, LatentVideo{{1e6}, {0}}, 1e-3).all_finite());
}

TEST_CASE("GMM validation") {
  CHECK_THROWS_AS(GmmVideoModel({}), InvalidParameter);
  CHECK_THROWS_AS(GmmVideoModel({GmmComponent{0.5, LatentVideo{{0}}, 1.0}}), InvalidParameter);
  CHECK_THROWS_AS(GmmVideoModel({GmmComponent{0.5, LatentVideo{{0}}, 1.0}, GmmComponent{0.5, LatentVideo{{0, 1}}, 1.0}}),
                  ShapeMismatch);
}

TEST_CASE("bridge: independent frames ignore the endpoints") {
  std::mt19937_64 gen(8);
  const auto mu = random_video(gen, 5, 2);
  const auto m = GaussianVideoModel::ar1(mu, 1.0, 0.0);
  const auto b = bridge_oracle(m, Frame{10, -10}, Frame{3, 3});
  REQUIRE(b.mean.frames() == 3);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t d = 0; d < 2; ++d) CHECK(b.mean(i, d) == doctest::Approx(mu(i + 1, d)).epsilon(1e-9));
}

TEST_CASE("bridge: point mass") {
  const LatentVideo v{{1}, {2}, {3}, {4}};
  const auto b = bridge_oracle(GaussianVideoModel::point_mass(v), Frame{1}, Frame{4});
  CHECK(b.regularized);
  CHECK(b.mean(0, 0) == doctest::Approx(2.0));
  CHECK(b.mean(1, 0) == doctest::Approx(3.0));
  CHECK(b.covariance.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("bridge: AR(1) three frames, formula and rejection sampling") {
  const double phi = 0.9;
  const auto m = GaussianVideoModel::ar1(LatentVideo(3, 1), 1.0, phi);
  const auto b = bridge_oracle(m, Frame{1.0}, Frame{1.0});
  CHECK_FALSE(b.regularized);
  // [phi, phi] [[1, phi^2], [phi^2, 1]]^-1 [1, 1]^T = 2 phi / (1 + phi^2).
  CHECK(b.mean(0, 0) == doctest::Approx(1.8 / 1.81).epsilon(1e-9));
  CHECK(b.mean(0, 0) == doctest::Approx(0.994475138121547).epsilon(1e-9));
  CHECK(b.covariance(0, 0) == doctest::Approx(1.0 - 2 * phi * phi / (1 + phi * phi)).epsilon(1e-9));

  // Rejection: keep AR(1) paths whose endpoints land near (1, 1).
  std::mt19937_64 gen(9);
  std::normal_distribution<double> n;
  const double innov = std::sqrt(1 - phi * phi), h = 0.05;
  double sum = 0.0;
  long kept = 0;
  for (long i = 0; i < 20000000; ++i) {
    const double x0 = n(gen);
    if (std::abs(x0 - 1.0) > h) continue;
    const double x1 = phi * x0 + innov * n(gen);
    const double x2 = phi * x1 + innov * n(gen);
    if (std::abs(x2 - 1.0) > h) continue;
    sum += x1;
    ++kept;
  }
  REQUIRE(kept > 5000);
  CHECK(sum / kept == doctest::Approx(b.mean(0, 0)).epsilon(0.02));
}

TEST_CASE("preconditioned wrapper") {
  // F(z) = 0 gives D(x) = c_skip x.
  const PreconditionedDenoiser zero(2, 1, [](const LatentVideo& z, double, const Frame*) { return LatentVideo(z.frames(), z.dims()); });
  const auto out = zero.denoise(LatentVideo{{2}, {4}}, 0.5, Frame{0});
  CHECK(out.cond(0, 0) == doctest::Approx(1.0));
  CHECK(out.uncond(1, 0) == doctest::Approx(2.0));

  // The conditional pass sees the frame, the unconditional pass a null pointer.
  int with = 0, without = 0;
  const PreconditionedDenoiser probe(1, 1, [&](const LatentVideo& z, double, const Frame* c) {
    (c ? with : without)++;
    return z;
  });
  (void)probe.denoise(LatentVideo{{1}}, 1.0, Frame{3});
  CHECK(with == 1);
  CHECK(without == 1);
  CHECK_THROWS_AS(probe.denoise(LatentVideo{{1}, {2}}, 1.0, Frame{3}), ShapeMismatch);
}
