#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "kochlab/clt.hpp"
#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"

using namespace kochlab;
using kochlab::testing::default_flow;
using kochlab::testing::pt;

namespace {

const BumpCocycle& default_bump() {
  static const BumpCocycle bump(default_flow(), BumpParameters{});
  return bump;
}

FlowPoint default_center() {
  return {farthest_from_singularities(default_flow().roof.singularities), 0.3};
}

SkewProduct default_skew(double gain = 50.0) {
  SkewProduct sp;
  sp.base = &default_flow();
  sp.cocycle = &default_bump();
  sp.component = 0;
  sp.gain = gain;
  return sp;
}

bool same_fiber_point(FiberPoint a, FiberPoint b, double tol) {
  return a.y1 == b.y1 && a.y2 == b.y2 && std::fabs(a.v - b.v) <= tol;
}

}  // namespace

TEST_CASE("fiber flow: examples and errors") {
  FiberFlow fiber;
  FiberPoint q{pt(0.3), pt(0.7), 0.4};
  CHECK(same_fiber_point(fiber_evolve(fiber, q, 0.0), q, 0.0));
  FiberPoint up = fiber_evolve(fiber, q, 0.1);
  CHECK(up.y1 == q.y1);
  CHECK(up.v == doctest::Approx(0.5));

  FiberPoint origin{pt(0.0), pt(0.0), 0.0};
  FiberPoint after = fiber_evolve(fiber, origin, 1.2);
  CHECK(after.y1 == origin.y1);
  CHECK(after.y2 == origin.y2);
  CHECK(after.v == 0.0);

  // One crossing: (y, r(y)) ~ (A y, 0).
  FiberPoint top = fiber_evolve(fiber, q, fiber.roof(q.y1) - q.v + 0.05);
  CHECK(top.y1 == q.y1.times(2) + q.y2);
  CHECK(top.y2 == q.y1 + q.y2);
  CHECK(top.v == doctest::Approx(0.05));

  Rng rng(4);
  for (int i = 0; i < 200; ++i) {
    FiberPoint p = sample_fiber(fiber, rng);
    REQUIRE(p.v < fiber.roof(p.y1));
    double s = 20 * rng.uniform(), t = 20 * rng.uniform();
    FiberPoint back = fiber_evolve(fiber, fiber_evolve(fiber, p, s), -s);
    CHECK(same_fiber_point(back, p, 1e-12));
    FiberPoint two = fiber_evolve(fiber, fiber_evolve(fiber, p, s), t);
    CHECK(same_fiber_point(two, fiber_evolve(fiber, p, s + t), 1e-12));
  }

  try {
    fiber_evolve(fiber, q, 2 * fiber.horizon);
    FAIL("expected horizon error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kHorizon);
  }
  CHECK_THROWS_AS(make_fiber_flow(2, 1, 1, 2, 0.2), Error);
  CHECK_THROWS_AS(make_fiber_flow(1, 1, 0, 1, 0.2), Error);
  CHECK_THROWS_AS(make_fiber_flow(2, 1, 1, 1, 1.0), Error);
  CHECK_NOTHROW(make_fiber_flow(3, 1, 2, 1, 0.5));
}

TEST_CASE("fiber flow: invariant measure, observable, mixing") {
  FiberFlow fiber;
  // cos(2 pi y1) + v has mean (rho/2 + (1 + rho^2/2)/2) / mean r.
  const double expected = fiber.rho / 2 + (1 + fiber.rho * fiber.rho / 2) / 2;
  for (double t : {1.0, 10.0, 100.0}) {
    Rng rng(11);
    const int n = 40000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      FiberPoint q = fiber_evolve(fiber, sample_fiber(fiber, rng), t);
      double phi = std::cos(2 * M_PI * q.y1.value()) + q.v;
      sum += phi;
      sum2 += phi * phi;
    }
    double mean = sum / n, se = std::sqrt((sum2 / n - mean * mean) / n);
    CHECK(std::fabs(mean - expected) < 4 * se);
  }

  // Mean zero and squared norm of D by quadrature over the suspension.
  auto fiber_quad = [&](auto&& g) {
    auto outer = [&](double y1) {
      double r = fiber.roof(pt(y1));
      auto inner = [&](double v) { return g(FiberPoint{pt(y1), pt(0.0), v}); };
      return integrate_adaptive(inner, 0.0, std::min(r, 0.5), 1e-14, 1e-12).value;
    };
    return integrate_adaptive(outer, 0.0, 1.0, 1e-14, 1e-12).value;
  };
  CHECK(std::fabs(fiber_quad([](FiberPoint q) { return fiber_observable(q); })) <= 1e-6);
  double norm2 = fiber_quad([](FiberPoint q) { return fiber_observable(q) * fiber_observable(q); });
  CHECK(norm2 == doctest::Approx(fiber_observable_norm2()).epsilon(1e-9));

  double c0 = fiber_correlation(fiber, 0.0, 100000, 3);
  CHECK(c0 == doctest::Approx(fiber_observable_norm2()).epsilon(0.03));
  CHECK(std::fabs(fiber_correlation(fiber, 30.0, 100000, 3)) < 0.05 * c0);
}

TEST_CASE("Theta bump properties") {
  const KocherginFlow& flow = default_flow();
  ThetaPropertyReport rep = theta_properties(flow, default_center(), {0.1, 0.05}, {0.0, 0.02, 0.05});
  CHECK(rep.passed);
  REQUIRE(rep.rows.size() == 6);
  for (const ThetaPropertyRow& r : rep.rows) {
    CHECK(r.p1_max_excess <= 0.0);
    CHECK(std::fabs(r.p2_quadrature - r.p2_expected) <= 1e-6);
    CHECK(std::fabs(r.p3_quadrature - r.p3_expected) <= 1e-6);
    if (r.d == 0.0) CHECK(r.p3_quadrature == doctest::Approx(r.p2_quadrature).epsilon(1e-12));
  }
  CHECK(rep.rows[3].p2_expected == doctest::Approx(3.92699e-3).epsilon(1e-5));
  CHECK(rep.rows[3].strict_gaussian == doctest::Approx(std::exp(-4.0)));
  CHECK_THROWS_AS(theta_properties(flow, default_center(), {0.2}, {0.0}), Error);

  ThetaBump bump{default_center(), 0.05};
  CirclePoint th = bump.center.theta + pt(0.03);
  auto along = [&](double u) { return bump({th, u}); };
  CHECK(bump.fiber_mass(th, 0.2, 0.35) ==
        doctest::Approx(integrate_adaptive(along, 0.2, 0.35).value).epsilon(1e-10));
  auto column = [&](double s) {
    CirclePoint t = bump.center.theta + pt(s);
    return integrate_adaptive([&](double u) { return bump({t, u}); }, 0.0, 1.0, 1e-15, 1e-12).value;
  };
  CHECK(bump.total_mass() == doctest::Approx(integrate_adaptive(column, -0.5, 0.5, 1e-14).value).epsilon(1e-9));
  CHECK(bump({th, -0.1}) == 0.0);
}

TEST_CASE("skew product: frozen fiber, group property, cross-method displacement") {
  const KocherginFlow& flow = default_flow();
  ConstantCocycle zero(1, 0.0);
  SkewProduct frozen{&flow, FiberFlow{}, &zero, 0, 50.0};
  SkewPoint p{{pt(0.61), 0.7}, {pt(0.2), pt(0.9), 0.3}};
  SkewPoint q = skew_evolve(frozen, p, 137.0);
  CHECK(same_fiber_point(q.y, p.y, 0.0));
  FlowPoint base = evolve(flow, p.x, 137.0);
  CHECK(q.x.theta == base.theta);
  CHECK(q.x.u == base.u);

  SkewProduct sp = default_skew(1.0);
  Rng rng(21);
  int matched = 0;
  for (int i = 0; i < 40; ++i) {
    SkewPoint s0{sample_invariant_one(flow, rng), sample_fiber(sp.fiber, rng)};
    double S = 200 * rng.uniform(), T = 200 * rng.uniform();
    SkewPoint a = skew_evolve(sp, skew_evolve(sp, s0, S), T);
    SkewPoint b = skew_evolve(sp, s0, S + T);
    CHECK(circle_distance(a.x.theta, b.x.theta) == 0.0);
    CHECK(a.x.u == doctest::Approx(b.x.u).epsilon(1e-9));
    matched += same_fiber_point(a.y, b.y, 1e-8);
  }
  // A roof crossing within rounding of the split point may flip the fiber sheet.
  CHECK(matched >= 39);

  for (int i = 0; i < 10; ++i) {
    SkewPoint s0{sample_invariant_one(flow, rng), sample_fiber(sp.fiber, rng)};
    OrbitalIntegral quad = orbital_integral_quadrature(flow, *sp.cocycle, 0, s0.x, 1e3);
    SkewPoint end = skew_evolve(sp, s0, 1e3);
    FiberPoint via_quad = fiber_evolve(sp.fiber, s0.y, quad.value);
    CHECK(same_fiber_point(end.y, via_quad, 1e-6 + 10 * quad.error_estimate));
  }
}

TEST_CASE("skew orbit integrals against step-wise integration") {
  const KocherginFlow& flow = default_flow();
  SkewProduct sp = default_skew(50.0);
  // Near c_0 the fiber moves while the orbit crosses the bump; far from the
  // singularities it is frozen there.
  CirclePoint c0 = flow.roof.singularities[0];
  const std::vector<std::pair<FlowPoint, FlowPoint>> cases{
      {default_center(), {default_center().theta + pt(0.01), 0.0}},
      {{c0 + pt(0.025), 0.5}, {c0 + pt(0.02), 0.2}},
  };
  for (const auto& [center, start] : cases) {
    AppendixObservable H{ThetaBump{center, 0.05}, 1.0};
    SkewPoint p{start, {pt(0.3), pt(0.1), 0.2}};
    const double T = 30.0, h = 2e-4;
    const int steps = static_cast<int>(T / h);
    SkewPoint cur = p;
    double trap = 0.5 * H(cur);
    for (int i = 1; i <= steps; ++i) {
      cur = skew_evolve(sp, cur, h);
      trap += (i == steps ? 0.5 : 1.0) * H(cur);
    }
    trap *= h;
    std::vector<double> fast = skew_orbit_integrals(sp, H, p, {T / 2, T});
    CHECK(std::fabs(trap) > 1e-4);
    CHECK(fast[1] == doctest::Approx(trap).epsilon(1e-4));
    std::vector<double> half = skew_orbit_integrals(sp, H, p, {T / 2});
    CHECK(half[0] == doctest::Approx(fast[0]).epsilon(1e-12));
  }
}

TEST_CASE("CLT harness: zero observable and degenerate horizons") {
  SkewProduct sp = default_skew();
  AppendixObservable H{ThetaBump{default_center(), 0.05}, 0.0};
  auto res = clt_monte_carlo(sp, H, {50.0, 100.0}, 64, 3);
  REQUIRE(res.size() == 2);
  for (const CltResult& r : res) {
    for (double z : r.Z) CHECK(z == 0.0);
    CHECK(r.degenerate);
    CHECK_FALSE(r.ks_p_value);
  }
  VarianceSeries zero = variance_series(sp, H, 40.0, 64, 3);
  CHECK(zero.sigma2 == 0.0);
  CHECK(zero.c0 == 0.0);
}

TEST_CASE("variance series at t_max = 0 is the squared norm") {
  SkewProduct sp = default_skew();
  const double delta = 0.05;
  AppendixObservable H{ThetaBump{default_center(), delta}, 1.0};
  VarianceSeries vs = variance_series(sp, H, 0.0, 200000, 8);
  CHECK(vs.sigma2 == 0.0);
  CHECK(vs.correlation.empty());
  const double expected = 0.5 * M_PI * delta * delta * fiber_observable_norm2() / 4.0;
  CHECK(std::fabs(vs.c0 - expected) < 4 * vs.c0_se);
  CHECK(std::isinf(vs.tail_bound));
  VarianceSeries tailed = variance_series(sp, H, 10.0, 50, 8, 5, -3.0);
  CHECK(tailed.tail_bound == doctest::Approx(2 * std::fabs(tailed.c0) * std::pow(10.0, -2.0) / 2.0));
  CHECK(tailed.correlation.size() == 5);
}

TEST_CASE("CLT harness: determinism across workers") {
  SkewProduct sp = default_skew();
  AppendixObservable H{ThetaBump{default_center(), 0.05}, 1.0};
  auto a = clt_monte_carlo(sp, H, {100.0}, 600, 12, {1, 64});
  auto b = clt_monte_carlo(sp, H, {100.0}, 600, 12, {3, 64});
  REQUIRE(a[0].Z.size() == 600);
  CHECK(a[0].Z == b[0].Z);
  CHECK(a[0].ks_p_value);
  CHECK(a[0].sigma2 > 0);
}
