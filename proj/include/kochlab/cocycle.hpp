#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kochlab/kochergin.hpp"

namespace kochlab {

// A vector observable on the special-flow space, evaluated component-wise.
// `height` is f(theta), passed in to avoid re-evaluating the roof.
class Cocycle {
 public:
  virtual ~Cocycle() = default;
  virtual int components() const = 0;
  virtual double value(int j, CirclePoint theta, double u, double height) const = 0;
  // Integral of component j over the fiber piece [0, h] above theta.
  virtual double fiber_integral(int j, CirclePoint theta, double height, double h) const = 0;
  virtual double full_fiber_integral(int j, CirclePoint theta, double height) const {
    return fiber_integral(j, theta, height, height);
  }
  // True when component j vanishes on the whole fiber above theta.
  virtual bool vanishes_on_fiber(int, CirclePoint) const { return false; }
  // u-values where the component changes shape on this fiber (quadrature breakpoints).
  virtual std::vector<double> breakpoints(int, CirclePoint, double) const { return {}; }
  // Component j vanishes on [0, level) of the fiber above theta.
  virtual double zero_level(int j, CirclePoint theta, double height) const {
    return vanishes_on_fiber(j, theta) ? height : 0.0;
  }
};

struct BumpParameters {
  double kappa = 0.02;
  double margin = 0.5;  // m0: plateau starts this far from the fiber ends
};

// tau_j = P_j - m_j Q: P_j is 1 on the kappa-neighbourhood of the lifted
// singularity c_j and 0 outside the 2 kappa one; Q is a fixed bump away from
// all singular fibers and m_j makes the component mean zero.
class BumpCocycle : public Cocycle {
 public:
  BumpCocycle(const KocherginFlow& flow, const BumpParameters& params);

  int components() const override { return static_cast<int>(centers_.size()); }
  double value(int j, CirclePoint theta, double u, double height) const override;
  double fiber_integral(int j, CirclePoint theta, double height, double h) const override;
  bool vanishes_on_fiber(int j, CirclePoint theta) const override;
  std::vector<double> breakpoints(int j, CirclePoint theta, double height) const override;
  double zero_level(int j, CirclePoint theta, double height) const override;

  double kappa() const { return params_.kappa; }
  double margin() const { return params_.margin; }
  double correction_scale(int j) const { return scale_[j]; }
  CirclePoint correction_center() const { return q_center_; }
  double correction_height() const { return q_height_; }
  double correction_width() const { return q_width_; }
  double correction_band() const { return q_band_; }
  const std::vector<CirclePoint>& centers() const { return centers_; }

  // Plateau part alone (test hook for the mean-zero bookkeeping).
  double plateau_value(int j, CirclePoint theta, double u, double height) const;
  // Whether (theta, u) lies in the kappa-neighbourhood of the lifted c_j.
  bool in_core(int j, CirclePoint theta, double u, double height) const;
  // Integral of P_j over the whole flow space (dtheta du), by quadrature.
  double plateau_mass(int j) const;
  double correction_mass() const;

 private:
  double plateau_fiber_partial(double a, double height, double h) const;
  double correction_fiber_partial(CirclePoint theta, double h) const;

  BumpParameters params_;
  std::vector<CirclePoint> centers_;
  SingularRoof roof_base_;
  CompositeRoof roof_;
  std::vector<double> scale_;
  CirclePoint q_center_;
  double q_height_ = 0.0;
  double q_width_ = 0.0;
  double q_band_ = 0.0;
};

// Components depending on theta only: trigonometric polynomials with
// prescribed values and vanishing derivatives (orders 1..L) at the
// singularities and zero mean against f dtheta.
class AnalyticCocycle : public Cocycle {
 public:
  AnalyticCocycle(const KocherginFlow& flow, int order_L, int degree);

  int components() const override { return static_cast<int>(cos_.size()); }
  double value(int j, CirclePoint theta, double u, double height) const override;
  double fiber_integral(int j, CirclePoint theta, double height, double h) const override;

  // Derivative of order k of component j in theta.
  double derivative(int j, double theta, int k) const;
  int order() const { return order_L_; }
  int degree() const { return degree_; }
  double max_residual() const { return max_residual_; }

 private:
  int order_L_;
  int degree_;
  std::vector<std::vector<double>> cos_;  // [j][k], k = 0..degree
  std::vector<std::vector<double>> sin_;
  double max_residual_ = 0.0;
};

// Test hooks.
class ConstantCocycle : public Cocycle {
 public:
  ConstantCocycle(int components, double value) : n_(components), c_(value) {}
  int components() const override { return n_; }
  double value(int, CirclePoint, double, double) const override { return c_; }
  double fiber_integral(int, CirclePoint, double, double h) const override { return c_ * h; }
  bool vanishes_on_fiber(int, CirclePoint) const override { return c_ == 0.0; }

 private:
  int n_;
  double c_;
};

struct OrbitalIntegral {
  int component = 0;
  FlowPoint start;
  double T = 0.0;
  double value = 0.0;
  std::string method;
  double error_estimate = 0.0;
  std::uint64_t N = 0;            // returns to the base
  CirclePoint end_theta;
  double ergodic_part = 0.0;      // S_N(f_0(. - c_j))(theta); decomposition only
  double start_fiber_term = 0.0;  // integral over [0, w] of the first fiber
  double end_fiber_term = 0.0;    // integral over [0, residual] of the last fiber
};

// Adaptive Gauss-Kronrod along every fiber segment of the orbit.
OrbitalIntegral orbital_integral_quadrature(const KocherginFlow& flow, const Cocycle& cocycle, int j,
                                            FlowPoint p, double T, double tol = 1e-10);

// The fiber decomposition: full-fiber integrals summed over the N returns,
// minus the piece below the start, plus the piece of the last fiber.
OrbitalIntegral orbital_integral_fast(const KocherginFlow& flow, const Cocycle& cocycle, int j,
                                      FlowPoint p, double T);

// All components at each of the increasing horizons in one orbit walk;
// result[k][j] is the j-th integral up to T_grid[k].
std::vector<std::vector<double>> orbital_integrals(const KocherginFlow& flow, const Cocycle& cocycle,
                                                   FlowPoint p, const std::vector<double>& T_grid);

// Component-wise difference of two cocycles (for the analytic comparison).
class DifferenceCocycle : public Cocycle {
 public:
  DifferenceCocycle(const Cocycle& a, const Cocycle& b) : a_(a), b_(b) {}
  int components() const override { return a_.components(); }
  double value(int j, CirclePoint t, double u, double f) const override {
    return a_.value(j, t, u, f) - b_.value(j, t, u, f);
  }
  double fiber_integral(int j, CirclePoint t, double f, double h) const override {
    return a_.fiber_integral(j, t, f, h) - b_.fiber_integral(j, t, f, h);
  }
  double full_fiber_integral(int j, CirclePoint t, double f) const override {
    return a_.full_fiber_integral(j, t, f) - b_.full_fiber_integral(j, t, f);
  }

 private:
  const Cocycle& a_;
  const Cocycle& b_;
};

struct AgreementRow {
  FlowPoint start;
  int component = 0;
  double quadrature = 0.0;
  double fast = 0.0;
  double ergodic_part = 0.0;
  double budget = 0.0;       // |f(x - c_j)| + |f(x + N alpha - c_j)| + ln^4 T
  double ratio = 0.0;        // |quadrature - ergodic_part| / budget
  bool numerically_equal = false;
};

struct AgreementReport {
  std::vector<AgreementRow> rows;
  double fitted_C = 0.0;
  double frozen_C = 0.0;
  double max_numerical_gap = 0.0;
  bool passed = false;
};

AgreementReport check_orbital_agreement(const KocherginFlow& flow, const BumpCocycle& cocycle,
                                        double T, std::size_t points, std::uint64_t seed,
                                        double frozen_C, const ParallelOptions& options = {});

struct Case1Row {
  FlowPoint start;
  int seeded_component = 0;
  std::uint64_t N = 0;
  double best_integral = 0.0;  // max_j of the orbital integral
  double margin = 0.0;         // best_integral - eps^2 T
};

struct Case1Report {
  double epsilon = 0.0;
  double T = 0.0;
  double N_limit = 0.0;  // T^{1-eps}
  std::size_t attempts = 0;
  std::vector<Case1Row> rows;
  double min_margin = 0.0;
  bool passed = false;
};

Case1Report check_case1_lower_bound(const KocherginFlow& flow, const Cocycle& cocycle,
                                    double epsilon, double T, std::size_t points,
                                    std::uint64_t seed);

struct S2Row {
  double T = 0.0;
  double threshold = 0.0;  // C ln^2 T
  std::size_t small = 0;   // samples below threshold
  double fraction = 0.0;
  double fraction_se = 0.0;
};

struct S2Report {
  double constant_C = 0.0;
  std::size_t samples = 0;
  std::vector<S2Row> rows;
  double exponent = 0.0;  // log-log slope of fraction against T
  bool strictly_decreasing = false;
  bool passed = false;
  std::vector<std::vector<double>> norms;  // [k][sample] max_j |integral|
};

S2Report scan_S2_smallset(const KocherginFlow& flow, const Cocycle& cocycle, double C_const,
                          const std::vector<double>& T_grid, std::size_t samples,
                          std::uint64_t seed, const ParallelOptions& options = {});

struct AnalyticDifferenceRow {
  double T = 0.0;
  double q99 = 0.0;  // 0.99-quantile of ||int (tau - tau_bar)|| / ln^5 T
  std::size_t kept = 0;
  std::size_t excluded = 0;
  double exclusion_radius = 0.0;  // T^{-20/gamma}
  double exclusion_mass_bound = 0.0;
};

struct AnalyticDifferenceReport {
  std::vector<AnalyticDifferenceRow> rows;
  double slope = 0.0;
  double max_q99 = 0.0;
  double calibration = 0.0;
  bool passed = false;
};

AnalyticDifferenceReport check_analytic_difference(const KocherginFlow& flow, const Cocycle& smooth,
                                                   const Cocycle& analytic,
                                                   const std::vector<double>& T_grid,
                                                   std::size_t samples, std::uint64_t seed,
                                                   double calibration,
                                                   const ParallelOptions& options = {});

}  // namespace kochlab
