#include <doctest.h>

#include <random>

#include "vibid/errors.hpp"
#include "vibid/latent.hpp"

using namespace vibid;

namespace {

LatentVideo random_video(std::mt19937_64& gen, std::size_t F, std::size_t D) {
  std::normal_distribution<double> n;
  LatentVideo v(F, D);
  for (double& x : v.flat()) x = n(gen);
  return v;
}

}  // namespace

TEST_CASE("flip reverses frames") {
  CHECK(flip(LatentVideo{{1}, {2}, {3}}) == LatentVideo{{3}, {2}, {1}});
  CHECK(flip(LatentVideo{{1, 10}, {2, 20}}) == LatentVideo{{2, 20}, {1, 10}});
}

TEST_CASE("flip is a linear involution") {
  std::mt19937_64 gen(7);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t F = 2 + trial % 7, D = 1 + trial % 4;
    const auto u = random_video(gen, F, D);
    const auto v = random_video(gen, F, D);
    CHECK(flip(flip(u)) == u);
    const double a = 0.3 + trial, b = -1.7;
    CHECK(max_abs_diff(flip(a * u + b * v), a * flip(u) + b * flip(v)) < 1e-12);
  }
}

TEST_CASE("extract_last_frame") {
  CHECK(extract_last_frame(LatentVideo{{1}, {2}, {3}}) == Frame{3});
  CHECK(extract_last_frame(LatentVideo{{4.5}}) == Frame{4.5});
  std::mt19937_64 gen(11);
  const auto v = random_video(gen, 5, 3);
  CHECK(extract_last_frame(flip(v)) == v.frame_copy(0));
  CHECK_THROWS_AS(extract_last_frame(LatentVideo{}), ShapeMismatch);
}

TEST_CASE("lerp endpoints and midpoint") {
  const LatentVideo a{{2}}, b{{4}};
  CHECK(lerp(a, b, 1.0) == a);
  CHECK(lerp(a, b, 0.0) == b);
  CHECK(lerp(a, b, 0.5) == LatentVideo{{3}});
  std::mt19937_64 gen(3);
  const auto v = random_video(gen, 4, 2);
  for (double l : {0.0, 0.25, 0.5, 0.9, 1.0}) CHECK(max_abs_diff(lerp(v, v, l), v) < 1e-15);
}

TEST_CASE("lerp errors") {
  CHECK_THROWS_AS(lerp(LatentVideo(2, 1), LatentVideo(3, 1), 0.5), ShapeMismatch);
  CHECK_THROWS_AS(lerp(LatentVideo(2, 1), LatentVideo(2, 1), 1.5), InvalidParameter);
}

TEST_CASE("construction checks") {
  CHECK_THROWS_AS(LatentVideo(2, 2, std::vector<double>{1, 2, 3}), ShapeMismatch);
  CHECK_THROWS_AS((LatentVideo{{1, 2}, {3}}), ShapeMismatch);
  LatentVideo v(3, 2);
  v.set_frame(1, Frame{5, 6});
  CHECK(v(1, 0) == 5);
  CHECK(v(1, 1) == 6);
  CHECK_THROWS_AS(v.set_frame(0, Frame{1}), ShapeMismatch);
}
