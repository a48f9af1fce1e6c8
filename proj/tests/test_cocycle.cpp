#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kochlab/cocycle.hpp"
#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/stats.hpp"

using namespace kochlab;
using kochlab::testing::default_flow;
using kochlab::testing::pt;

namespace {

const BumpCocycle& default_bump() {
  static const BumpCocycle bump(default_flow(), BumpParameters{});
  return bump;
}

// Roof at c_j +- a with the singular part carried in double precision.
double height_near(const KocherginFlow& flow, int j, double a, bool right) {
  double h = eval_roof_parts(flow.roof.base, a, 1 - a);
  CirclePoint at = flow.roof.singularities[j] + (right ? pt(a) : -pt(a));
  for (int i = 0; i < flow.roof.count(); ++i) {
    if (i != j) h += eval_roof(flow.roof.base, at - flow.roof.singularities[i]);
  }
  return h;
}

// Fiber integral of a component by pointwise quadrature, split at the
// plateau levels so each panel is smooth.
double fiber_quadrature(const BumpCocycle& bump, int j, CirclePoint theta, double f, double h) {
  std::vector<double> cuts{0.0};
  const double k = bump.kappa(), m0 = bump.margin();
  for (double c : {m0 - 2 * k, m0 - k, m0, f - m0, f - m0 + k, f - m0 + 2 * k,
                   bump.correction_height() - bump.correction_band(), bump.correction_height(),
                   bump.correction_height() + bump.correction_band()}) {
    if (c > 0 && c < h) cuts.push_back(c);
  }
  cuts.push_back(h);
  std::sort(cuts.begin(), cuts.end());
  double total = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    total += integrate_adaptive([&](double u) { return bump.value(j, theta, u, f); }, cuts[i], cuts[i + 1],
                                1e-13, 1e-12)
                 .value;
  }
  return total;
}

}  // namespace

TEST_CASE("bump cocycle: plateau values and supports") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  REQUIRE(bump.components() == 4);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> U(-1, 1);
  for (int j = 0; j < 4; ++j) {
    CirclePoint c = flow.roof.singularities[j];
    CirclePoint theta = c + pt(1e-4);
    double f = flow.height(theta);
    CHECK(bump.value(j, theta, f / 2, f) == doctest::Approx(1.0).epsilon(1e-15));
    for (int trial = 0; trial < 200; ++trial) {
      CirclePoint t = c + pt(U(gen) * bump.kappa());
      double h = flow.height(t);
      double u = bump.margin() - bump.kappa() + (0.5 + 0.5 * U(gen)) * (h - 2 * (bump.margin() - bump.kappa()));
      REQUIRE(bump.in_core(j, t, u, h));
      CHECK(bump.value(j, t, u, h) == 1.0);
      for (int i = 0; i < 4; ++i) {
        if (i != j) CHECK(bump.value(i, t, u, h) == 0.0);
      }
    }
    // Fiber ends are never on the plateau.
    CHECK(bump.plateau_value(j, theta, 0.0, f) == 0.0);
    CHECK(bump.plateau_value(j, theta, f, f) == 0.0);
  }
}

TEST_CASE("bump cocycle: construction errors") {
  const KocherginFlow& flow = default_flow();
  // Closest pair is 0.15 apart.
  CHECK_THROWS_AS(BumpCocycle(flow, BumpParameters{0.04, 0.5}), Error);
  try {
    BumpCocycle(flow, BumpParameters{0.04, 0.5});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeometry);
  }
  CHECK_NOTHROW(BumpCocycle(flow, BumpParameters{0.037, 0.5}));
  CHECK_THROWS_AS(BumpCocycle(flow, BumpParameters{0.02, 0.03}), Error);
  // With disjoint 2 kappa-balls the widest gap always leaves room, so only a
  // lone singularity with kappa >= 1/4 has no correction region.
  KocherginFlow lone = make_flow(cf_named("golden", 40), make_composite_roof(flow.roof.base, {pt(0.3)}));
  try {
    BumpCocycle(lone, BumpParameters{0.26, 0.6});
    FAIL("expected a geometry error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kGeometry);
  }
}

TEST_CASE("bump cocycle: closed-form fiber integrals match pointwise quadrature") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> U(0, 1);
  for (int trial = 0; trial < 300; ++trial) {
    int j = static_cast<int>(gen() % 4);
    CirclePoint theta;
    switch (trial % 3) {
      case 0: theta = flow.roof.singularities[j] + pt((2 * U(gen) - 1) * 2.2 * bump.kappa()); break;
      case 1: theta = bump.correction_center() + pt((2 * U(gen) - 1) * 1.1 * bump.correction_width()); break;
      default: theta = CirclePoint::from_raw(gen());
    }
    double f = flow.height(theta);
    double h = U(gen) * f;
    double closed = bump.fiber_integral(j, theta, f, h);
    CHECK(closed == doctest::Approx(fiber_quadrature(bump, j, theta, f, h)).epsilon(1e-9).scale(1.0));
    CHECK(bump.full_fiber_integral(j, theta, f) ==
          doctest::Approx(fiber_quadrature(bump, j, theta, f, f)).epsilon(1e-9).scale(1.0));
  }
}

TEST_CASE("bump cocycle: mean zero by two-dimensional quadrature") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  const double kappa = bump.kappa();
  for (int j = 0; j < 4; ++j) {
    double total = 0;
    for (bool right : {false, true}) {
      auto inner = [&](double a) {
        double f = height_near(flow, j, a, right);
        CirclePoint theta = flow.roof.singularities[j] + (right ? pt(a) : -pt(a));
        return fiber_quadrature(bump, j, theta, f, f);
      };
      total += integrate_left_singular(inner, 0, kappa, 1e-12, 1e-11).value;
      total += integrate_adaptive(inner, kappa, 2 * kappa, 1e-12, 1e-11).value;
    }
    double w = bump.correction_width();
    auto corr = [&](double x) {
      CirclePoint theta = bump.correction_center() + pt(x);
      double f = flow.height(theta);
      return fiber_quadrature(bump, j, theta, f, f);
    };
    total += integrate_adaptive(corr, -w, w, 1e-12, 1e-11).value;
    double mean = total / flow.roof.count();
    CHECK(std::fabs(mean) <= 1e-6);
    CHECK(bump.correction_scale(j) > 0);
  }
}

TEST_CASE("analytic cocycle: single singularity example") {
  std::vector<CirclePoint> one{pt(0.0)};
  KocherginFlow flow = make_flow(cf_named("golden", 40),
                                 make_composite_roof(kochlab::testing::default_roof(), {pt(0.5)}));
  // The jet conditions are translation-invariant; place the singularity at 0.
  flow.roof.singularities = one;
  AnalyticCocycle tau(flow, 0, 2);
  CHECK(tau.max_residual() < 1e-10);
  CHECK(tau.value(0, pt(0.0), 0, 0) == doctest::Approx(1.0).epsilon(1e-10));
  // Mean against f by independent quadrature.
  auto g = [&](double t) {
    return tau.derivative(0, t, 0) * eval_roof_parts(flow.roof.base, t, 1 - t);
  };
  double mean = integrate_left_singular(g, 0, 0.5, 1e-14, 1e-13).value +
                integrate_left_singular(
                    [&](double s) {
                      return tau.derivative(0, 1 - s, 0) * eval_roof_parts(flow.roof.base, 1 - s, s);
                    },
                    0, 0.5, 1e-14, 1e-13)
                    .value;
  CHECK(std::fabs(mean) < 1e-8);
}

TEST_CASE("analytic cocycle: jets at every singularity by finite differences") {
  const KocherginFlow& flow = default_flow();
  const int L = 2;
  AnalyticCocycle tau(flow, L, 10);
  CHECK(tau.max_residual() < 1e-10);
  const int K = tau.degree();
  const double h = 0.01 / (2 * M_PI * K);
  auto value = [&](int j, double x) { return tau.value(j, pt(x), 0, 0); };
  // Central differences with one Richardson step.
  auto d1 = [&](int j, double x, double s) { return (value(j, x + s) - value(j, x - s)) / (2 * s); };
  auto d2 = [&](int j, double x, double s) {
    return (value(j, x + s) - 2 * value(j, x) + value(j, x - s)) / (s * s);
  };
  for (int j = 0; j < 4; ++j) {
    // Natural size of each derivative: its sup over a grid.
    double scale1 = 0, scale2 = 0;
    for (double x = 0; x < 1; x += 1.0 / 512) {
      scale1 = std::max(scale1, std::fabs(tau.derivative(j, x, 1)));
      scale2 = std::max(scale2, std::fabs(tau.derivative(j, x, 2)));
    }
    for (int i = 0; i < 4; ++i) {
      double c = flow.roof.singularities[i].value();
      CHECK(value(j, c) == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-8).scale(1.0));
      double r1 = (4 * d1(j, c, h / 2) - d1(j, c, h)) / 3;
      double r2 = (4 * d2(j, c, h / 2) - d2(j, c, h)) / 3;
      CHECK(std::fabs(r1) <= 1e-6 * std::max(1.0, scale1));
      CHECK(std::fabs(r2) <= 1e-6 * std::max(1.0, scale2));
    }
  }
}

TEST_CASE("analytic cocycle: rank deficiency") {
  try {
    AnalyticCocycle(default_flow(), 2, 5);
    FAIL("expected a rank-deficiency error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kRankDeficient);
  }
}

TEST_CASE("bump minus analytic is flat in theta at the singularities") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  AnalyticCocycle tau(flow, 2, 10);
  for (int j = 0; j < 4; ++j) {
    for (int i = 0; i < 4; ++i) {
      CirclePoint c = flow.roof.singularities[i];
      double f = flow.height(c + pt(1e-3));
      double u = f / 2;
      for (double s : {-1e-3, 0.0, 1e-3}) {
        CirclePoint t = c + pt(s + (s == 0 ? 1e-9 : 0));
        CHECK(bump.value(j, t, u, f) == (i == j ? 1.0 : 0.0));
      }
      CHECK(std::fabs(tau.derivative(j, c.value(), 0) - (i == j ? 1.0 : 0.0)) < 1e-8);
    }
  }
}

TEST_CASE("orbital integrals: constant and plateau hooks") {
  const KocherginFlow& flow = default_flow();
  ConstantCocycle one(4, 1.0);
  FlowPoint p{pt(0.4321), 0.7};
  for (double T : {0.5, 17.0, 250.0}) {
    CHECK(orbital_integral_quadrature(flow, one, 2, p, T).value == doctest::Approx(T).epsilon(1e-13));
    CHECK(orbital_integral_fast(flow, one, 2, p, T).value == doctest::Approx(T).epsilon(1e-13));
  }
  const BumpCocycle& bump = default_bump();
  CirclePoint theta = flow.roof.singularities[1] + pt(1e-3);
  FlowPoint q{theta, 1.0};
  CHECK(orbital_integral_quadrature(flow, bump, 1, q, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(orbital_integral_fast(flow, bump, 1, q, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  // A fiber taller than T, entered inside the plateau.
  CirclePoint tall = flow.roof.singularities[3] - pt(1e-9);
  FlowPoint r{tall, 10.0};
  REQUIRE(flow.height(tall) > 30.0);
  CHECK(orbital_integral_fast(flow, bump, 3, r, 10.0).value == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(orbital_integral_quadrature(flow, bump, 3, r, 10.0).value == doctest::Approx(10.0).epsilon(1e-10));
}

TEST_CASE("orbital integrals: decomposition agrees with quadrature") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  std::vector<FlowPoint> starts = sample_invariant(flow, 77, 30);
  for (std::size_t i = 0; i < starts.size(); ++i) {
    int j = static_cast<int>(i % 4);
    for (double T : {0.3, 100.0}) {
      OrbitalIntegral q = orbital_integral_quadrature(flow, bump, j, starts[i], T);
      OrbitalIntegral fast = orbital_integral_fast(flow, bump, j, starts[i], T);
      CHECK(q.N == fast.N);
      CHECK(std::fabs(q.value - fast.value) <= 1e-8 * std::max(1.0, std::fabs(q.value)) + 10 * q.error_estimate);
    }
  }
  // Start right next to a singular fiber: the boundary term dominates.
  FlowPoint near{flow.roof.singularities[0] + pt(1e-6), 0.2};
  OrbitalIntegral q = orbital_integral_quadrature(flow, bump, 0, near, 100.0);
  OrbitalIntegral fast = orbital_integral_fast(flow, bump, 0, near, 100.0);
  CHECK(q.value > 5.0);
  CHECK(fast.value > 5.0);
  CHECK(fast.value == doctest::Approx(q.value).epsilon(1e-9));
}

TEST_CASE("orbital integrals: additivity and the vector walk") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  std::vector<FlowPoint> starts = sample_invariant(flow, 78, 40);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> U(0, 500);
  for (const FlowPoint& p : starts) {
    double S = U(gen), T = U(gen);
    std::vector<double> grid{S, S + T};
    if (S > S + T) std::swap(grid[0], grid[1]);
    auto v = orbital_integrals(flow, bump, p, grid);
    auto tail = orbital_integrals(flow, bump, evolve(flow, p, S), {T});
    for (int j = 0; j < 4; ++j) {
      CHECK(v[1][j] == doctest::Approx(v[0][j] + tail[0][j]).epsilon(1e-9).scale(1.0));
      CHECK(v[1][j] == doctest::Approx(orbital_integral_fast(flow, bump, j, p, S + T).value).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("orbital integrals: time averages vanish") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  const double T = 1e5;
  FlowPoint p{pt(0.2468), 0.5};
  auto v = orbital_integrals(flow, bump, p, {T});
  std::vector<FlowPoint> sample = sample_invariant(flow, 91, 20000);
  for (int j = 0; j < 4; ++j) {
    std::vector<double> vals;
    for (const FlowPoint& s : sample) vals.push_back(bump.value(j, s.theta, s.u, flow.height(s.theta)));
    double sd = std::sqrt(moments(vals).variance);
    CHECK(std::fabs(v[0][j] / T) <= 10 * sd / std::sqrt(T));
  }
}

TEST_CASE("orbital agreement report") {
  const KocherginFlow& flow = default_flow();
  AgreementReport rep = check_orbital_agreement(flow, default_bump(), 300.0, 12, 5, 0.0, {2, 4});
  CHECK(rep.rows.size() == 48);
  CHECK(rep.passed);
  CHECK(rep.fitted_C < 1.0);
}

TEST_CASE("case-1 lower bound") {
  const KocherginFlow& flow = default_flow();
  Case1Report rep = check_case1_lower_bound(flow, default_bump(), 0.05, 1e3, 10, 4);
  CHECK(rep.rows.size() == 10);
  CHECK(rep.passed);
  for (const Case1Row& r : rep.rows) CHECK(static_cast<double>(r.N) < rep.N_limit);
  try {
    check_case1_lower_bound(flow, default_bump(), 0.45, 1e3, 3, 4);
    FAIL("expected a construction failure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kConstructionFailure);
  }
}

TEST_CASE("S2 small-set scan") {
  const KocherginFlow& flow = default_flow();
  ConstantCocycle zero(4, 0.0);
  S2Report z = scan_S2_smallset(flow, zero, 1.0, {100, 1000}, 50, 1);
  for (const S2Row& r : z.rows) CHECK(r.fraction == 1.0);
  CHECK_FALSE(z.passed);
  S2Report a = scan_S2_smallset(flow, default_bump(), 0.5, {100, 1000}, 300, 2, {1, 64});
  S2Report b = scan_S2_smallset(flow, default_bump(), 0.5, {100, 1000}, 300, 2, {3, 64});
  CHECK(a.norms == b.norms);
  for (const S2Row& r : a.rows) {
    CHECK(r.fraction >= 0.0);
    CHECK(r.fraction <= 1.0);
  }
}

TEST_CASE("analytic difference") {
  const KocherginFlow& flow = default_flow();
  const BumpCocycle& bump = default_bump();
  AnalyticDifferenceReport same = check_analytic_difference(flow, bump, bump, {100, 1000}, 50, 3, 0.0);
  CHECK(same.max_q99 == 0.0);
  AnalyticCocycle tau(flow, 2, 10);
  AnalyticDifferenceReport rep = check_analytic_difference(flow, bump, tau, {100, 1000}, 200, 3, 0.0, {2, 64});
  CHECK(rep.passed);
  for (const auto& row : rep.rows) {
    CHECK(row.excluded == 0);
    CHECK(row.exclusion_mass_bound < 1e-100);
  }
}
