#pragma once

#include <cmath>
#include <functional>
#include <vector>

namespace kochlab {

// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::fabs(sum_) >= std::fabs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  CompensatedSum& operator+=(double x) { add(x); return *this; }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;
  int evaluations = 0;
};

using RealFn = std::function<double(double)>;

// Adaptive Gauss-Kronrod (7/15) on [a, b]; bisects until the per-panel
// Kronrod-Gauss difference meets max(abs_tol, rel_tol * |panel|) scaled by width.
QuadratureResult integrate_adaptive(const RealFn& f, double a, double b,
                                    double abs_tol = 1e-12, double rel_tol = 1e-12,
                                    int max_depth = 50);

// Integral over [a, b] of a function with an integrable x^{-p} (p < 1)
// singularity at a: substitutes x = a + (b - a) t^4.
QuadratureResult integrate_left_singular(const RealFn& f, double a, double b,
                                         double abs_tol = 1e-13, double rel_tol = 1e-12);

// Gauss-Legendre rule on [-1, 1].
struct GaussRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};
GaussRule gauss_legendre(int n);

// C-infinity transition on [0, 1]: 0 at 0, 1 at 1, S(x) + S(1 - x) = 1.
double smooth_step(double x);

// Plateau profile: 1 on [0, 1], descends smoothly to 0 on [1, 2], 0 beyond.
double plateau(double s);

// Integral of plateau over [0, s] for s >= 0 (saturates at 3/2).
double plateau_integral(double s);

}  // namespace kochlab
