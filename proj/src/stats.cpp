#include "kochlab/stats.hpp"

#include <algorithm>
#include <cmath>

#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"

namespace kochlab {

Moments moments(const std::vector<double>& xs) {
  Moments m;
  m.count = xs.size();
  if (xs.empty()) return m;
  CompensatedSum s;
  for (double x : xs) s += x;
  m.mean = s.value() / xs.size();
  CompensatedSum s2, s3, s4;
  for (double x : xs) {
    double d = x - m.mean;
    s2 += d * d;
    s3 += d * d * d;
    s4 += d * d * d * d;
  }
  double n = static_cast<double>(xs.size());
  if (xs.size() > 1) m.variance = s2.value() / (n - 1);
  double m2 = s2.value() / n;
  if (m2 > 0) {
    m.skewness = (s3.value() / n) / std::pow(m2, 1.5);
    m.excess_kurtosis = (s4.value() / n) / (m2 * m2) - 3.0;
  }
  return m;
}

double quantile(std::vector<double> xs, double p) {
  if (xs.empty()) raise(ErrorCode::kPrecondition, "quantile of empty sample");
  std::sort(xs.begin(), xs.end());
  double h = (xs.size() - 1) * std::clamp(p, 0.0, 1.0);
  std::size_t lo = static_cast<std::size_t>(std::floor(h));
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - lo) * (xs[hi] - xs[lo]);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    raise(ErrorCode::kPrecondition, "line fit needs two or more paired points");
  }
  double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit fit;
  if (sxx == 0) raise(ErrorCode::kPrecondition, "line fit with constant abscissa");
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (x.size() > 2) {
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double r = y[i] - fit.intercept - fit.slope * x[i];
      rss += r * r;
    }
    fit.slope_stderr = std::sqrt(rss / (n - 2) / sxx);
  }
  return fit;
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) raise(ErrorCode::kDomain, "normal quantile needs p in (0,1)");
  // Bisection bracket followed by Newton polishing.
  double lo = -40, hi = 40;
  for (int i = 0; i < 80; ++i) {
    double mid = 0.5 * (lo + hi);
    if (normal_cdf(mid) < p) lo = mid; else hi = mid;
  }
  double x = 0.5 * (lo + hi);
  for (int i = 0; i < 3; ++i) {
    double pdf = std::exp(-0.5 * x * x) / std::sqrt(2 * M_PI);
    if (pdf < 1e-300) break;
    x -= (normal_cdf(x) - p) / pdf;
  }
  return x;
}

double kolmogorov_survival(double lambda) {
  if (lambda <= 0.0) return 1.0;
  if (lambda < 1.0) {
    // Theta-function form converges fast for small lambda.
    double s = 0.0;
    double c = M_PI * M_PI / (8.0 * lambda * lambda);
    for (int k = 1; k < 50; k += 2) s += std::exp(-k * k * c);
    return 1.0 - std::sqrt(2.0 * M_PI) / lambda * s;
  }
  double s = 0.0;
  for (int k = 1; k < 100; ++k) {
    double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1 ? 2.0 : -2.0) * term;
    if (term < 1e-300) break;
  }
  return std::clamp(s, 0.0, 1.0);
}

KsResult ks_test_normal(std::vector<double> xs, double mean, double variance) {
  KsResult r;
  if (xs.empty() || !(variance > 0)) return r;
  std::sort(xs.begin(), xs.end());
  double n = static_cast<double>(xs.size());
  double sd = std::sqrt(variance);
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    double cdf = normal_cdf((xs[i] - mean) / sd);
    d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
  }
  r.statistic = d;
  double sn = std::sqrt(n);
  r.p_value = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
  return r;
}

}  // namespace kochlab
