#pragma once

#include <vector>

#include "kochlab/circle.hpp"

namespace kochlab {

// f(theta) = a (theta^-g + (1 - theta)^-g) + b on (0, 1), normalised to
// mean one; A = a g (g + 1) is the constant of f'' ~ A theta^{-2-g}.
struct SingularRoof {
  double gamma = 1.0 / 3.0;
  double coeff_a = 0.1;
  double offset_b = 0.7;
  double asymptotic_A = 0.1 * 4.0 / 9.0;

  // Value at theta = 1/2, the minimum of the symmetric profile.
  double minimum() const;
};

SingularRoof make_singular_roof(double gamma, double coeff_a);

// order 0, 1 or 2; throws a singularity error at theta = 0.
double eval_roof(const SingularRoof& roof, CirclePoint theta, int order = 0);

// Evaluation from the two distances t and s = 1 - t to the singular point,
// each supplied at full relative precision (for quadrature near the
// singularity, below the fixed-point resolution of CirclePoint).
double eval_roof_parts(const SingularRoof& roof, double t, double s, int order = 0);

// Same as eval_roof with the mean removed (order 0 only differs).
inline double eval_roof_centered(const SingularRoof& roof, CirclePoint theta) {
  return eval_roof(roof, theta, 0) - 1.0;
}

// Exact integral of the roof over [lo, hi] with 0 <= lo <= hi <= 1.
double roof_integral(const SingularRoof& roof, double lo, double hi);

struct CompositeRoof {
  SingularRoof base;
  std::vector<CirclePoint> singularities;
  double inf_value = 0.0;
  CirclePoint inf_point;
  double inv_inf = 0.0;  // C = 1 / inf f

  int count() const { return static_cast<int>(singularities.size()); }
};

CompositeRoof make_composite_roof(const SingularRoof& base, std::vector<CirclePoint> singularities);

double eval_composite(const CompositeRoof& f, CirclePoint theta, int order = 0);

// Distance from theta to the nearest singularity and its index.
struct NearestSingularity {
  int index = -1;
  double distance = 0.0;
};
NearestSingularity nearest_singularity(const CompositeRoof& f, CirclePoint theta);

// Base point at maximal distance from every singularity.
CirclePoint farthest_from_singularities(const std::vector<CirclePoint>& points);

struct RoofCheckReport {
  double symmetry_gap = 0.0;      // max |f(t) - f(1 - t)|
  double min_second = 0.0;        // min f'' on the grid
  double fd_first_error = 0.0;    // max relative error, difference quotient of f vs f'
  double fd_second_error = 0.0;   // same for f' vs f''
  double centered_integral = 0.0; // quadrature of f - 1 over the circle
  double composite_mean = 0.0;    // grid mean of the composite roof
  int composite_count = 0;
  bool passed = false;
};

// Model checks on a grid of `points` in [1e-3, 1 - 1e-3]: symmetry,
// convexity, derivative consistency and the centred mean.
RoofCheckReport check_roof(const SingularRoof& roof, const CompositeRoof& composite, int points = 2000);

}  // namespace kochlab
