#include <doctest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kochlab/birkhoff.hpp"
#include "kochlab/error.hpp"
#include "kochlab/kochergin.hpp"
#include "kochlab/numerics.hpp"

using namespace kochlab;
using kochlab::testing::default_flow;
using kochlab::testing::pt;

namespace {

FlowPoint random_point(std::mt19937_64& gen, const KocherginFlow& flow) {
  CirclePoint theta = CirclePoint::from_raw(gen());
  double f = flow.height(theta);
  return {theta, std::uniform_real_distribution<double>(0, f)(gen)};
}

// Oracle for integrals of powers of f: per-arc quadrature with the distance
// to the arc's end singularities carried in double precision.
double integral_of_power(const KocherginFlow& flow, int power) {
  std::vector<CirclePoint> cs = flow.roof.singularities;
  std::sort(cs.begin(), cs.end());
  double total = 0;
  for (std::size_t i = 0; i < cs.size(); ++i) {
    CirclePoint left = cs[i], right = cs[(i + 1) % cs.size()];
    double len = (right - left).value();
    auto f_at = [&](double s, bool from_left) {
      CirclePoint theta = from_left ? left + pt(s) : right - pt(s);
      double sum = 0;
      for (std::size_t k = 0; k < cs.size(); ++k) {
        if (from_left && k == i) sum += eval_roof_parts(flow.roof.base, s, 1 - s);
        else if (!from_left && k == (i + 1) % cs.size()) sum += eval_roof_parts(flow.roof.base, 1 - s, s);
        else sum += eval_roof(flow.roof.base, theta - cs[k]);
      }
      return std::pow(sum, power);
    };
    total += integrate_left_singular([&](double s) { return f_at(s, true); }, 0, len / 2).value;
    total += integrate_left_singular([&](double s) { return f_at(s, false); }, 0, len / 2).value;
  }
  return total;
}

}  // namespace

TEST_CASE("evolution basics") {
  const auto& flow = default_flow();
  FlowPoint p{pt(0.2), 1.0};
  auto same = evolve(flow, p, 0.0);
  CHECK(same.theta == p.theta);
  CHECK(same.u == p.u);
  auto up = evolve(flow, p, 0.5);
  CHECK(up.theta == p.theta);
  CHECK(up.u == doctest::Approx(1.5));

  FlowPoint base{pt(0.2), 0.0};
  double t = ergodic_sum([&](CirclePoint x) { return eval_composite(flow.roof, x); }, base.theta,
                         17, flow.alpha());
  auto land = evolve_counted(flow, base, t);
  CirclePoint target = base.theta + flow.alpha().times(17);
  bool at_bottom = land.point.theta == target && land.point.u < 1e-9;
  bool at_top = land.point.theta == target - flow.alpha() &&
                flow.height(land.point.theta) - land.point.u < 1e-9;
  CHECK((at_bottom || at_top));
  CHECK_THROWS_AS(evolve(flow, p, 2e7), Error);
}

TEST_CASE("flow property and invertibility (property)") {
  const auto& flow = default_flow();
  std::mt19937_64 gen(41);
  std::uniform_real_distribution<double> time(-500, 500);
  for (int trial = 0; trial < 1000; ++trial) {
    FlowPoint p = random_point(gen, flow);
    double s = time(gen), t = time(gen);
    FlowPoint a = evolve(flow, evolve(flow, p, s), t);
    FlowPoint b = evolve(flow, p, s + t);
    double tol = 1e-6 * (1 + std::fabs(s) + std::fabs(t));
    // Near a fiber top the two routes may sit on either side of the identification.
    if (a.theta == b.theta) {
      CHECK(std::fabs(a.u - b.u) <= tol);
    } else {
      FlowPoint lower = (a.theta + flow.alpha() == b.theta) ? a : b;
      FlowPoint upper = (a.theta + flow.alpha() == b.theta) ? b : a;
      CHECK(lower.theta + flow.alpha() == upper.theta);
      CHECK(flow.height(lower.theta) - lower.u + upper.u <= tol);
    }
    FlowPoint back = evolve(flow, evolve(flow, p, t), -t);
    if (back.theta == p.theta) {
      CHECK(std::fabs(back.u - p.u) <= tol);
    } else {
      CHECK(std::min(back.u, p.u) <= tol);
    }
  }
}

TEST_CASE("return counts") {
  const auto& flow = default_flow();
  FlowPoint p{pt(0.2), 0.5};
  CHECK(return_count(flow, p, 0.1).N == 0);
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 300; ++trial) {
    FlowPoint q = random_point(gen, flow);
    double T = std::uniform_real_distribution<double>(1, 2000)(gen);
    auto rc = return_count(flow, q, T);
    CHECK(rc.N <= std::ceil(T * flow.inv_inf_f()) + 1);
    auto ev = evolve_counted(flow, q, T);
    CHECK(static_cast<std::int64_t>(rc.N) == ev.n);
    CHECK(ev.point.theta == q.theta + flow.alpha().times(rc.N));
    CHECK(rc.residual >= 0);
    CHECK(rc.residual < flow.height(ev.point.theta));
  }
  // A fiber 1e-12 from a singularity is about a * 1e4 tall and swallows most of T = 1000.
  FlowPoint tall{flow.roof.singularities[1] + pt(1e-12), 0.0};
  auto rc = return_count(flow, tall, 1000.0);
  CHECK(rc.N == 0);
  FlowPoint mid{flow.roof.singularities[1] + pt(1e-9), 0.0};
  auto rc2 = return_count(flow, mid, 1000.0);
  CHECK(rc2.N < 0.9 * 1000.0 * flow.inv_inf_f());
  CHECK(static_cast<std::int64_t>(rc2.N) == evolve_counted(flow, mid, 1000.0).n);
}

TEST_CASE("invariant sampling matches quadrature oracles") {
  const auto& flow = default_flow();
  CHECK_THROWS_AS(sample_invariant(flow, 1, 0), Error);
  const std::size_t n = 400000;
  auto pts = sample_invariant(flow, 99, n);
  double sum = 0, sum2 = 0, below = 0;
  for (const auto& p : pts) {
    double f = flow.height(p.theta);
    CHECK(p.u < f);
    sum += f;
    sum2 += f * f;
    below += p.u < 1.0;
  }
  double mean = sum / n;
  double se = std::sqrt((sum2 / n - mean * mean) / n);
  double f1 = integral_of_power(flow, 1);
  double f2 = integral_of_power(flow, 2);
  CHECK(f1 == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::fabs(mean - f2 / f1) <= 3 * se);
  double frac = below / n;
  double frac_se = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::fabs(frac - 0.25) <= 3 * frac_se);  // f > 1 everywhere, so the fraction is 1/4
  auto again = sample_invariant(flow, 99, 1000, {3, 64});
  auto serial = sample_invariant(flow, 99, 1000, {1, 64});
  for (std::size_t i = 0; i < 1000; ++i) {
    CHECK(again[i].theta == serial[i].theta);
    CHECK(again[i].u == serial[i].u);
  }
}

TEST_CASE("measure preservation (Monte Carlo)") {
  const auto& flow = default_flow();
  auto pts = sample_invariant(flow, 5, 100000);
  auto phi = [](FlowPoint p) { return std::cos(2 * M_PI * p.theta.value()) * std::exp(-p.u) + p.u * 0.1; };
  for (double t : {1.0, 10.0, 100.0}) {
    double s0 = 0, s1 = 0, d2 = 0;
    for (const auto& p : pts) {
      double a = phi(p), b = phi(evolve(flow, p, t));
      s0 += a;
      s1 += b;
      d2 += (b - a) * (b - a);
    }
    double n = static_cast<double>(pts.size());
    double se = std::sqrt(d2 / n / n);
    CHECK(std::fabs(s1 / n - s0 / n) <= 4 * se);
  }
}

TEST_CASE("S3 non-return window") {
  const auto& flow = default_flow();
  FlowPoint x0{farthest_from_singularities(flow.roof.singularities), 0.3};
  S3Options opts;
  opts.samples = 1000;
  auto rep = check_S3(flow, x0, {0.01}, opts);
  CHECK(rep.passed);
  CHECK(rep.rows[0].min_clearance > 0);
  try {
    check_S3(flow, x0, {0.6}, opts);
    FAIL("expected window-empty");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kWindowEmpty);
  }
}

TEST_CASE("S1 statistics") {
  const auto& flow = default_flow();
  auto zero = check_S1_empirical(flow, zero_observable(), {100, 1000}, 200, 3);
  for (const auto& row : zero.rows) {
    CHECK(row.median == 0);
    CHECK(row.q90 == 0);
  }
  SeparableObservable h = cosine_bump_observable(0.4);
  CHECK(h.fiber_antiderivative(0.4) == doctest::Approx(1.0).epsilon(1e-12));
  auto w_int = integrate_adaptive(h.fiber, 0, 0.4, 1e-15, 1e-15).value;
  CHECK(w_int == doctest::Approx(1.0).epsilon(1e-12));
  // Orbit integral against direct quadrature along the flow line.
  FlowPoint p{pt(0.3), 0.2};
  double direct = integrate_adaptive([&](double t) { return h(evolve(flow, p, t)); }, 0, 30, 1e-11, 1e-11, 60).value;
  CHECK(h.orbit_integral(flow, p, 30) == doctest::Approx(direct).epsilon(1e-6));
  auto rep = check_S1_empirical(flow, h, {100, 1000}, 300, 3);
  CHECK(rep.passed);
  CHECK(rep.rows[1].q90 < rep.rows[0].q90);
}
