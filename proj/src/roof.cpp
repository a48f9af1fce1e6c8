#include "kochlab/roof.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"

namespace kochlab {

double SingularRoof::minimum() const {
  return std::pow(2.0, 1.0 + gamma) * coeff_a + offset_b;
}

SingularRoof make_singular_roof(double gamma, double coeff_a) {
  if (!(gamma > 0.0 && gamma < 0.5)) {
    raise(ErrorCode::kDomain, "roof exponent gamma must lie in (0, 1/2)");
  }
  if (!(coeff_a > 0.0)) raise(ErrorCode::kDomain, "roof coefficient a must be positive");
  SingularRoof r;
  r.gamma = gamma;
  r.coeff_a = coeff_a;
  r.offset_b = 1.0 - 2.0 * coeff_a / (1.0 - gamma);
  r.asymptotic_A = coeff_a * gamma * (gamma + 1.0);
  if (!(r.minimum() > 0.0)) {
    std::ostringstream msg;
    msg << "roof is not positive: minimum 2^(1+gamma) a + b = " << r.minimum();
    raise(ErrorCode::kPositivity, msg.str());
  }
  return r;
}

double eval_roof(const SingularRoof& roof, CirclePoint theta, int order) {
  if (theta.raw() == 0) raise(ErrorCode::kSingularity, "roof evaluated at its singular point");
  return eval_roof_parts(roof, theta.value(), theta.complement(), order);
}

double eval_roof_parts(const SingularRoof& roof, double t, double s, int order) {
  if (!(t > 0.0 && s > 0.0)) raise(ErrorCode::kSingularity, "roof evaluated at its singular point");
  double g = roof.gamma;
  switch (order) {
    case 0:
      return roof.coeff_a * (std::pow(t, -g) + std::pow(s, -g)) + roof.offset_b;
    case 1:
      return roof.coeff_a * g * (std::pow(s, -g - 1.0) - std::pow(t, -g - 1.0));
    case 2:
      return roof.asymptotic_A * (std::pow(t, -g - 2.0) + std::pow(s, -g - 2.0));
    default:
      raise(ErrorCode::kDomain, "roof derivative order must be 0, 1 or 2");
  }
}

double roof_integral(const SingularRoof& roof, double lo, double hi) {
  double e = 1.0 - roof.gamma;
  auto prim = [&](double t) {
    return roof.coeff_a * (std::pow(t, e) - std::pow(1.0 - t, e)) / e + roof.offset_b * t;
  };
  return prim(hi) - prim(lo);
}

CompositeRoof make_composite_roof(const SingularRoof& base, std::vector<CirclePoint> singularities) {
  if (singularities.empty()) raise(ErrorCode::kDomain, "composite roof needs a singularity");
  CompositeRoof f;
  f.base = base;
  f.singularities = std::move(singularities);
  std::vector<CirclePoint> sorted = f.singularities;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i] == sorted[i - 1]) raise(ErrorCode::kDomain, "singularities must be distinct");
  }
  // f is convex on every arc between consecutive singularities: golden-section
  // search per arc in raw offsets from the left endpoint.
  f.inf_value = INFINITY;
  const double golden = (std::sqrt(5.0) - 1.0) / 2.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    CirclePoint left = sorted[i];
    CirclePoint right = sorted[(i + 1) % sorted.size()];
    std::uint64_t span = (right - left).raw();
    if (sorted.size() == 1) span = ~std::uint64_t{0};
    double lo = 0.0, hi = std::ldexp(static_cast<double>(span), -64);
    auto at = [&](double x) { return left + CirclePoint::from_double(x); };
    auto value = [&](double x) { return eval_composite(f, at(x)); };
    double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
      if (f1 < f2) {
        hi = x2;
        x2 = x1;
        f2 = f1;
        x1 = hi - golden * (hi - lo);
        f1 = value(x1);
      } else {
        lo = x1;
        x1 = x2;
        f1 = f2;
        x2 = lo + golden * (hi - lo);
        f2 = value(x2);
      }
    }
    double xm = 0.5 * (lo + hi);
    double fm = value(xm);
    if (fm < f.inf_value) {
      f.inf_value = fm;
      f.inf_point = at(xm);
    }
  }
  if (!(f.inf_value > 0.0)) raise(ErrorCode::kPositivity, "composite roof is not positive");
  f.inv_inf = 1.0 / f.inf_value;
  return f;
}

double eval_composite(const CompositeRoof& f, CirclePoint theta, int order) {
  if (f.singularities.size() == 1) return eval_roof(f.base, theta - f.singularities[0], order);
  CompensatedSum sum;
  for (CirclePoint c : f.singularities) sum += eval_roof(f.base, theta - c, order);
  return sum.value();
}

NearestSingularity nearest_singularity(const CompositeRoof& f, CirclePoint theta) {
  NearestSingularity best{-1, INFINITY};
  for (int i = 0; i < f.count(); ++i) {
    double d = circle_distance(theta, f.singularities[i]);
    if (d < best.distance) best = {i, d};
  }
  return best;
}

CirclePoint farthest_from_singularities(const std::vector<CirclePoint>& points) {
  std::vector<CirclePoint> sorted = points;
  std::sort(sorted.begin(), sorted.end());
  CirclePoint best = sorted[0] + CirclePoint::from_raw(std::uint64_t{1} << 63);
  std::uint64_t best_gap = 0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    CirclePoint left = sorted[i];
    CirclePoint right = sorted[(i + 1) % sorted.size()];
    std::uint64_t gap = sorted.size() == 1 ? ~std::uint64_t{0} : (right - left).raw();
    if (gap > best_gap) {
      best_gap = gap;
      best = left + CirclePoint::from_raw(gap / 2);
    }
  }
  return best;
}

RoofCheckReport check_roof(const SingularRoof& roof, const CompositeRoof& composite, int points) {
  if (points < 2) raise(ErrorCode::kDomain, "roof check needs at least two grid points");
  RoofCheckReport rep;
  rep.min_second = std::numeric_limits<double>::infinity();
  const double lo = 1e-3, hi = 1 - 1e-3;
  for (int i = 0; i < points; ++i) {
    double t = lo + (hi - lo) * i / (points - 1);
    rep.symmetry_gap = std::max(rep.symmetry_gap,
                                std::fabs(eval_roof_parts(roof, t, 1 - t) - eval_roof_parts(roof, 1 - t, t)));
    rep.min_second = std::min(rep.min_second, eval_roof_parts(roof, t, 1 - t, 2));
    double h = 1e-4 * std::min(t, 1 - t);
    for (int order : {0, 1}) {
      double fd = (eval_roof_parts(roof, t + h, 1 - t - h, order) - eval_roof_parts(roof, t - h, 1 - t + h, order)) /
                  (2 * h);
      double exact = eval_roof_parts(roof, t, 1 - t, order + 1);
      double scale = std::max(std::fabs(exact), 1.0);
      double err = std::fabs(fd - exact) / scale;
      double& slot = order == 0 ? rep.fd_first_error : rep.fd_second_error;
      slot = std::max(slot, err);
    }
  }
  // Independent of roof_integral: substitution quadrature from each singular end.
  auto left = [&](double t) { return eval_roof_parts(roof, t, 1 - t) - 1.0; };
  auto right = [&](double s) { return eval_roof_parts(roof, 1 - s, s) - 1.0; };
  rep.centered_integral = integrate_left_singular(left, 0.0, 0.5).value + integrate_left_singular(right, 0.0, 0.5).value;
  const int grid = 1 << 20;
  CompensatedSum mean;
  for (int i = 0; i < grid; ++i) mean += eval_composite(composite, CirclePoint::from_double((i + 0.5) / grid));
  rep.composite_mean = mean.value() / grid;
  rep.composite_count = composite.count();
  rep.passed = rep.symmetry_gap <= 1e-12 * roof.minimum() && rep.min_second > 0 && rep.fd_first_error <= 1e-4 &&
               rep.fd_second_error <= 1e-4 && std::fabs(rep.centered_integral) <= 1e-8 &&
               std::fabs(rep.composite_mean - rep.composite_count) <= 1e-3 * rep.composite_count;
  return rep;
}

}  // namespace kochlab
