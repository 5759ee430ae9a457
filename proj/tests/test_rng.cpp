#include <doctest.h>

#include <cmath>
#include <set>

#include "vibid/rng.hpp"

using namespace vibid;

TEST_CASE("streams are pure functions of (seed, step, phase)") {
  NoiseStream a(42, 7, NoisePhase::kRenoise), b(42, 7, NoisePhase::kRenoise);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct keys give distinct streams") {
  std::set<std::uint64_t> firsts;
  for (std::uint64_t seed : {0ull, 1ull, 2ull})
    for (std::uint64_t t : {0ull, 1ull, 25ull})
      for (auto ph : {NoisePhase::kInitial, NoisePhase::kRenoise}) firsts.insert(NoiseStream(seed, t, ph).next_u64());
  CHECK(firsts.size() == 18);
}

TEST_CASE("uniforms are in the open unit interval") {
  NoiseStream s(1, 2, NoisePhase::kTest);
  for (int i = 0; i < 100000; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
  }
}

TEST_CASE("normal moments") {
  NoiseStream s(9, 0, NoisePhase::kTest);
  const int n = 200000;
  double m1 = 0, m2 = 0, m4 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    m1 += z;
    m2 += z * z;
    m4 += z * z * z * z;
  }
  m1 /= n;
  m2 /= n;
  m4 /= n;
  CHECK(std::abs(m1) < 5.0 / std::sqrt(n));
  CHECK(std::abs(m2 - 1.0) < 5.0 * std::sqrt(2.0 / n));
  CHECK(std::abs(m4 - 3.0) < 0.1);
}
