#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "kochlab/circle.hpp"
#include "kochlab/diophantine.hpp"
#include "kochlab/random.hpp"
#include "kochlab/roof.hpp"

namespace kochlab {

struct KocherginFlow {
  ContinuedFraction cf;
  CompositeRoof roof;
  DiophantineCertificate certificate;
  double horizon = 1e7;  // largest |t| accepted by evolve

  CirclePoint alpha() const { return cf.alpha_point; }
  double inv_inf_f() const { return roof.inv_inf; }
  double height(CirclePoint theta) const;  // f(theta), guarded
};

// The certificate is computed with class_constant; flows outside the class are
// still built and carry passed = false.
KocherginFlow make_flow(ContinuedFraction cf, CompositeRoof roof, double class_constant = 3.0);

struct FlowPoint {
  CirclePoint theta;
  double u = 0.0;
};

struct EvolveResult {
  FlowPoint point;
  std::int64_t n = 0;  // fibers crossed (negative backwards)
};

EvolveResult evolve_counted(const KocherginFlow& flow, FlowPoint p, double t);
inline FlowPoint evolve(const KocherginFlow& flow, FlowPoint p, double t) {
  return evolve_counted(flow, p, t).point;
}

struct ReturnCount {
  std::uint64_t N = 0;
  double residual = 0.0;  // u + T - S_N(f)(theta)
};

ReturnCount return_count(const KocherginFlow& flow, FlowPoint p, double T);

// Walks the orbit of p over [0, T] one fiber segment at a time, calling
// segment(theta, u_from, u_to, t_start) for each vertical piece.
void for_each_segment(const KocherginFlow& flow, FlowPoint p, double T,
                      const std::function<void(CirclePoint, double, double, double)>& segment);

// I.i.d. points of the normalised invariant measure dtheta du / int f.
std::vector<FlowPoint> sample_invariant(const KocherginFlow& flow, std::uint64_t seed,
                                        std::size_t count, const ParallelOptions& options = {});

// One invariant-measure draw from an existing generator.
FlowPoint sample_invariant_one(const KocherginFlow& flow, Rng& rng);

// Product distance max(||dtheta||, |du|) used for balls in the special-flow space.
double product_distance(FlowPoint a, FlowPoint b);

struct S3Row {
  double delta = 0.0;
  double t_min = 0.0;
  double t_max = 0.0;
  std::size_t trials = 0;
  double min_clearance = 0.0;  // min over samples and times of dist(K_t y, x0) - delta
  bool passed = false;
};

struct S3Report {
  double m = 1.05;
  double constant_C = 2.0;
  std::vector<S3Row> rows;
  bool passed = false;
};

struct S3Options {
  double m = 1.05;
  double constant_C = 2.0;
  std::size_t samples = 1000;
  int time_points = 60;
  std::uint64_t seed = 1;
  int workers = 1;
};

S3Report check_S3(const KocherginFlow& flow, FlowPoint x0, const std::vector<double>& delta_grid,
                  const S3Options& options = {});

// Observable g(theta) w(u) with w supported in [0, fiber_top] below inf f;
// orbit integrals are exact through the antiderivative of w.
struct SeparableObservable {
  std::function<double(double)> base;
  std::function<double(double)> fiber;
  std::function<double(double)> fiber_antiderivative;
  double fiber_top = 0.0;

  double operator()(FlowPoint p) const;
  // Integral of the observable along the flow line over [0, T].
  double orbit_integral(const KocherginFlow& flow, FlowPoint p, double T) const;
};

// cos(2 pi theta) times the normalised bump (u (top - u))^4 on [0, top].
SeparableObservable cosine_bump_observable(double top = 0.4);
SeparableObservable zero_observable();

struct S1Row {
  double T = 0.0;
  double median = 0.0;
  double q90 = 0.0;
};

struct S1Report {
  std::vector<S1Row> rows;
  double slope = 0.0;  // log-log fit of q90 against T
  double mean_check = 0.0;
  bool passed = false;
};

S1Report check_S1_empirical(const KocherginFlow& flow, const SeparableObservable& H,
                            const std::vector<double>& T_grid, std::size_t samples,
                            std::uint64_t seed, const ParallelOptions& options = {});

}  // namespace kochlab
