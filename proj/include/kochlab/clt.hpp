#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "kochlab/cocycle.hpp"
#include "kochlab/kochergin.hpp"
#include "kochlab/random.hpp"

namespace kochlab {

// Suspension of a hyperbolic toral automorphism y -> A y under the roof
// r(y) = 1 + rho cos(2 pi y_1); mean roof 1.
struct FiberFlow {
  std::int64_t a11 = 2, a12 = 1, a21 = 1, a22 = 1;
  double rho = 0.2;
  double horizon = 1e9;

  double roof(CirclePoint y1) const { return 1.0 + rho * std::cos(2 * M_PI * y1.value()); }
};

FiberFlow make_fiber_flow(std::int64_t a11, std::int64_t a12, std::int64_t a21, std::int64_t a22, double rho);

struct FiberPoint {
  CirclePoint y1, y2;
  double v = 0.0;
};

FiberPoint fiber_evolve(const FiberFlow& fiber, FiberPoint q, double t);
FiberPoint sample_fiber(const FiberFlow& fiber, Rng& rng);

// Smooth window on [0, 1/2]: rises over [0, 0.1], 1 on [0.1, 0.4], falls to 0 at 1/2.
double fiber_window(double v);

// Mean-zero fiber observable D = sin(2 pi y_1) window(v); the window stays
// below min r, so the mean vanishes in y_1.
double fiber_observable(FiberPoint q);
// ||D||^2 under the normalised fiber measure.
double fiber_observable_norm2();

// Periodised (in theta) Gaussian bump of width delta at (theta0, u0).
struct ThetaBump {
  FlowPoint center;
  double delta = 0.05;
  int lattice_radius = 3;

  double operator()(FlowPoint x) const;
  // Theta-factor sum_m exp(-(theta - theta0 - m)^2 / delta^2).
  double base_factor(CirclePoint theta) const;
  // Integral over u in [u1, u2] at fixed theta.
  double fiber_mass(CirclePoint theta, double u1, double u2) const;
  // Integral over the special-flow space (dtheta du), u >= 0.
  double total_mass() const;
  // |theta - theta0| beyond this leaves Theta below e^{-64}.
  double reach() const { return 8 * delta; }
};

struct ThetaPropertyRow {
  double delta = 0.0;
  double d = 0.0;
  double p1_max_excess = 0.0;  // max of value - e^{-delta^{-0.1}} over the P1 region (<= 0 passes)
  double p2_quadrature = 0.0;
  double p2_expected = 0.0;    // (pi/2) delta^2
  double p3_quadrature = 0.0;
  double p3_expected = 0.0;    // (pi/2) delta^2 e^{-d^2 / 2 delta^2}
  double strict_gaussian = 0.0;  // e^{-(0.1/delta)^2}, recorded beside the P1 bound
  bool passed = false;
};

struct ThetaPropertyReport {
  std::vector<ThetaPropertyRow> rows;
  bool passed = false;
};

ThetaPropertyReport theta_properties(const KocherginFlow& flow, FlowPoint center,
                                     const std::vector<double>& delta_grid,
                                     const std::vector<double>& d_grid, double tolerance = 1e-6);

struct SkewProduct {
  const KocherginFlow* base = nullptr;
  FiberFlow fiber;
  const Cocycle* cocycle = nullptr;
  int component = 0;
  double gain = 1.0;  // fiber time per unit of cocycle integral
};

struct SkewPoint {
  FlowPoint x;
  FiberPoint y;
};

SkewPoint skew_evolve(const SkewProduct& sp, SkewPoint p, double T);

// H(x, y) = weight * Theta(x) * D(y).
struct AppendixObservable {
  ThetaBump theta;
  double weight = 1.0;

  double operator()(SkewPoint p) const { return weight * theta(p.x) * fiber_observable(p.y); }
};

// Integrals of H along the skew-product orbit of p up to each horizon in
// the increasing T_grid.
std::vector<double> skew_orbit_integrals(const SkewProduct& sp, const AppendixObservable& H, SkewPoint p,
                                         const std::vector<double>& T_grid);

struct CltResult {
  double T = 0.0;
  std::size_t samples = 0;
  std::vector<double> Z;
  double sigma2 = 0.0;
  double sigma2_se = 0.0;
  double mean = 0.0;
  double skewness = 0.0;
  double skewness_se = 0.0;
  double excess_kurtosis = 0.0;
  double kurtosis_se = 0.0;
  double ks_statistic = 0.0;
  std::optional<double> ks_p_value;  // reported only with >= 500 samples
  bool degenerate = false;
};

std::vector<CltResult> clt_monte_carlo(const SkewProduct& sp, const AppendixObservable& H,
                                       const std::vector<double>& T_grid, std::size_t samples,
                                       std::uint64_t seed, const ParallelOptions& options = {});

struct VarianceSeries {
  double t_max = 0.0;
  std::vector<double> t_edges;      // bin edges on [0, t_max]
  std::vector<double> correlation;  // bin averages of C(t)
  double c0 = 0.0;                  // C(0) = ||H||^2
  double c0_se = 0.0;
  double sigma2 = 0.0;              // 2 int_0^t_max C(t) dt
  double sigma2_se = 0.0;
  double tail_exponent = 0.0;       // decay exponent fed into the tail bound
  double tail_bound = 0.0;          // bound on 2 int_{t_max}^inf |C|; infinite if the exponent is >= -1
};

// Importance-sampled correlation integral: x is drawn from Theta dmu, y from
// the fiber measure.
VarianceSeries variance_series(const SkewProduct& sp, const AppendixObservable& H, double t_max,
                               std::size_t samples, std::uint64_t seed, int bins = 50,
                               double tail_exponent = 0.0, const ParallelOptions& options = {});

// Autocorrelation E[D(q) D(G_t q)] of the fiber observable by Monte Carlo.
double fiber_correlation(const FiberFlow& fiber, double t, std::size_t samples, std::uint64_t seed);

}  // namespace kochlab
