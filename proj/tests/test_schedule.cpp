#include <doctest.h>

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

#include "vibid/errors.hpp"
#include "vibid/schedule.hpp"

using namespace vibid;

TEST_CASE("karras: single level is forced to sigma_max") {
  const auto s = karras_schedule(1, 0.1, 10.0, 7.0);
  REQUIRE(s.steps() == 1);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 10.0);
}

TEST_CASE("karras: two levels at rho = 1 hit both endpoints") {
  const auto s = karras_schedule(2, 0.1, 10.0, 1.0);
  REQUIRE(s.steps() == 2);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.1);
  CHECK(s[2] == 10.0);
}

TEST_CASE("karras: 25-step SVD defaults match direct formula evaluation") {
  const auto s = karras_schedule(KarrasParams{});
  REQUIRE(s.steps() == 25);
  CHECK(s[0] == 0.0);
  CHECK(s[1] == 0.002);
  CHECK(s[25] == 700.0);
  // Frozen from an independent evaluation of (hi + i/24 (lo - hi))^7, i = 25 - t.
  CHECK(s[2] == doctest::Approx(0.007882495646757554).epsilon(1e-13));
  CHECK(s[13] == doctest::Approx(15.58996779996998).epsilon(1e-13));
  CHECK(s[24] == doctest::Approx(545.7292461673019).epsilon(1e-13));
  for (int t = 1; t <= 25; ++t) CHECK(s[t] > s[t - 1]);
}

TEST_CASE("karras: regeneration is bit-identical") {
  for (int T : {1, 2, 7, 25, 100}) {
    const auto a = karras_schedule(T, 0.01, 80.0, 7.0);
    const auto b = karras_schedule(T, 0.01, 80.0, 7.0);
    REQUIRE(a.values().size() == b.values().size());
    for (std::size_t i = 0; i < a.values().size(); ++i)
      CHECK(std::bit_cast<std::uint64_t>(a.values()[i]) == std::bit_cast<std::uint64_t>(b.values()[i]));
  }
}

TEST_CASE("karras: strictly monotone across a parameter grid") {
  for (int T : {2, 3, 10, 50})
    for (double rho : {0.5, 1.0, 3.0, 7.0}) {
      const auto s = karras_schedule(T, 0.002, 700.0, rho);
      for (int t = 1; t <= T; ++t) {
        CHECK(std::isfinite(s[t]));
        CHECK(s[t] > s[t - 1]);
      }
    }
}

TEST_CASE("karras: invalid parameters") {
  CHECK_THROWS_AS(karras_schedule(0, 0.1, 10, 7), InvalidParameter);
  CHECK_THROWS_AS(karras_schedule(5, 0.0, 10, 7), InvalidParameter);
  CHECK_THROWS_AS(karras_schedule(5, 10, 10, 7), InvalidParameter);
  CHECK_THROWS_AS(karras_schedule(5, 20, 10, 7), InvalidParameter);
  CHECK_THROWS_AS(karras_schedule(5, 0.1, 10, 0.0), InvalidParameter);
  CHECK_THROWS_AS(karras_schedule(5, 0.1, 10, -1.0), InvalidParameter);
}

TEST_CASE("SigmaSchedule rejects non-monotone input") {
  CHECK_THROWS_AS(SigmaSchedule({0.0, 1.0, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(SigmaSchedule({0.1, 1.0}), InvalidParameter);
  CHECK_THROWS_AS(SigmaSchedule({0.0}), InvalidParameter);
}

TEST_CASE("edm_precondition") {
  SUBCASE("zero noise is the identity") {
    const auto c = edm_precondition(0.0, 0.5);
    CHECK(c.c_skip == 1.0);
    CHECK(c.c_out == 0.0);
    CHECK(c.c_in == doctest::Approx(2.0));
    CHECK(std::isinf(c.c_noise));
  }
  SUBCASE("sigma == sigma_data halves c_skip") {
    for (double sd : {0.5, 1.0, 3.0}) {
      const auto c = edm_precondition(sd, sd);
      CHECK(c.c_skip == doctest::Approx(0.5));
      CHECK(c.c_out == doctest::Approx(sd / std::sqrt(2.0)));
    }
  }
  SUBCASE("large sigma drives c_skip to zero") {
    CHECK(edm_precondition(1e8, 0.5).c_skip < 1e-16);
    CHECK(edm_precondition(std::numeric_limits<double>::infinity(), 0.5).c_skip == 0.0);
  }
  SUBCASE("finite for positive sigma") {
    for (double s : {1e-6, 0.002, 1.0, 700.0}) {
      const auto c = edm_precondition(s);
      CHECK(std::isfinite(c.c_skip));
      CHECK(std::isfinite(c.c_out));
      CHECK(std::isfinite(c.c_in));
      CHECK(c.c_noise == doctest::Approx(0.25 * std::log(s)));
    }
  }
  CHECK_THROWS_AS(edm_precondition(-1.0), InvalidParameter);
  CHECK_THROWS_AS(edm_precondition(1.0, 0.0), InvalidParameter);
}
