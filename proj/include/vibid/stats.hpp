#pragma once

#include <span>
#include <vector>

namespace vibid {

/// Linear-interpolation quantile (type 7) of unsorted data; q in [0, 1].
double quantile(std::span<const double> data, double q);
inline double median(std::span<const double> data) { return quantile(data, 0.5); }
inline double iqr(std::span<const double> data) { return quantile(data, 0.75) - quantile(data, 0.25); }

struct SignTest {
  int positive = 0;
  int negative = 0;
  int ties = 0;
  double p_value = 1.0;  // two-sided, exact binomial, ties dropped
};

SignTest sign_test(std::span<const double> deltas);

}  // namespace vibid
