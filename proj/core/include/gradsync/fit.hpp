#pragma once

#include <span>
#include <utility>
#include <vector>

namespace gradsync {

struct FitResult {
  double slope = 0.0;
  double intercept = 0.0;
  double se_slope = 0.0;
  double se_intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::pair<double, double>> rows;  // (x, y) that entered the fit
};

/// Ordinary least squares y = intercept + slope x. Needs >= 3 distinct x;
/// throws NoFitPossible otherwise.
FitResult fit_loglinear(std::span<const double> x, std::span<const double> y);

double mean(std::span<const double> v);
double sample_stddev(std::span<const double> v);
/// Median of a copy; NaN on empty input.
double median(std::vector<double> v);

struct Interval {
  double lo;
  double hi;
  double half_width() const { return 0.5 * (hi - lo); }
};

/// Wilson score interval for k successes out of n at normal quantile z.
Interval wilson_interval(std::size_t k, std::size_t n, double z = 1.959963984540054);

}  // namespace gradsync
