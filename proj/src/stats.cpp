#include "vibid/stats.hpp"

#include <algorithm>
#include <cmath>

#include "vibid/errors.hpp"

namespace vibid {

double quantile(std::span<const double> data, double q) {
  if (data.empty()) throw InvalidParameter("quantile: empty data");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidParameter("quantile: q must lie in [0, 1]");
  std::vector<double> v(data.begin(), data.end());
  std::ranges::sort(v);
  const double h = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

SignTest sign_test(std::span<const double> deltas) {
  SignTest st;
  for (double d : deltas) {
    if (d > 0.0) ++st.positive;
    else if (d < 0.0) ++st.negative;
    else ++st.ties;
  }
  const int n = st.positive + st.negative;
  if (n == 0) return st;
  // Two-sided exact binomial(n, 1/2): 2 * P(X <= min(pos, neg)), capped at 1.
  const int k = std::min(st.positive, st.negative);
  const double log_half_n = n * std::log(0.5);
  double tail = 0.0;
  for (int i = 0; i <= k; ++i) {
    const double log_choose = std::lgamma(n + 1.0) - std::lgamma(i + 1.0) - std::lgamma(n - i + 1.0);
    tail += std::exp(log_choose + log_half_n);
  }
  st.p_value = std::min(1.0, 2.0 * tail);
  return st;
}

}  // namespace vibid
