#pragma once

#include <cstddef>
#include <vector>

namespace kochlab {

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
  double skewness = 0.0;
  double excess_kurtosis = 0.0;
};

Moments moments(const std::vector<double>& xs);

// Linear-interpolation quantile (type 7) of an unsorted sample.
double quantile(std::vector<double> xs, double p);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

// Ordinary least squares y = slope * x + intercept; needs two or more points.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

double normal_cdf(double x);
double normal_quantile(double p);

// Survival function of the limiting Kolmogorov distribution, P(K > lambda).
double kolmogorov_survival(double lambda);

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

// One-sample KS test against N(mean, variance); the p-value uses the
// asymptotic Kolmogorov law with the Stephens small-sample correction.
KsResult ks_test_normal(std::vector<double> xs, double mean, double variance);

}  // namespace kochlab
