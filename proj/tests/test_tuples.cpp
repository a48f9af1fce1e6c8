#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "kochlab/error.hpp"
#include "kochlab/tuples.hpp"

using namespace kochlab;
using kochlab::testing::default_flow;
using kochlab::testing::default_roof;
using kochlab::testing::pt;

namespace {

const ContinuedFraction& golden() {
  static const ContinuedFraction cf = cf_named("golden", 40);
  return cf;
}

// Independent sweep: arcs in raw units on a doubled line, sorted and merged.
double sweep_measure(CirclePoint c, const ContinuedFraction& cf, int n) {
  using Raw = unsigned __int128;
  const Raw full = Raw{1} << 64;
  double q = static_cast<double>(cf.q(n));
  double r = 1.0 / (q * std::pow(std::log(q), 5));
  Raw rr = arc_raw(r);
  std::vector<std::pair<Raw, Raw>> arcs;
  std::int64_t K = static_cast<std::int64_t>(2 * cf.q(n + 1));
  for (std::int64_t k = -K; k <= K; ++k) {
    Raw mid = (c + cf.alpha_point.times(k)).raw();
    Raw lo = mid + full - rr, hi = mid + full + rr;  // shifted by one turn
    if (hi - lo >= full) return 1.0;
    // Fold into [0, 2 full) and split at full.
    lo %= full;
    hi = lo + 2 * rr;
    if (hi <= full) {
      arcs.push_back({lo, hi});
    } else {
      arcs.push_back({lo, full});
      arcs.push_back({0, hi - full});
    }
  }
  std::sort(arcs.begin(), arcs.end());
  Raw total = 0, cur_lo = arcs[0].first, cur_hi = arcs[0].second;
  for (std::size_t i = 1; i < arcs.size(); ++i) {
    if (arcs[i].first <= cur_hi) {
      cur_hi = std::max(cur_hi, arcs[i].second);
    } else {
      total += cur_hi - cur_lo;
      cur_lo = arcs[i].first;
      cur_hi = arcs[i].second;
    }
  }
  total += cur_hi - cur_lo;
  return std::ldexp(static_cast<double>(total), -64);
}

}  // namespace

TEST_CASE("G(c, n) sets") {
  const ContinuedFraction& cf = golden();
  for (int n = 3; n <= 12; ++n) {
    CirclePoint c = pt(0.123 * n);
    GcnSet g = build_gcn(c, cf, n);
    CHECK(g.arc_count == 4 * cf.q(n + 1) + 1);
    double q = static_cast<double>(cf.q(n));
    CHECK(g.radius == 1.0 / (q * std::pow(std::log(q), 5)));
    CHECK(g.set.contains(c + cf.alpha_point.times(static_cast<std::int64_t>(cf.q(n + 1)))));
    CHECK(g.set.contains(c));
    CHECK(g.set.measure() == sweep_measure(c, cf, n));
    if (n >= 6) {
      // Class-D bound with the certificate constant 2.
      double bound = 8 * 2.0 / std::pow(std::log(q), 3) * (1 + 1.0 / (4 * cf.q(n + 1)));
      CHECK(g.unmerged_measure <= bound);
    }
  }
  for (int n : {0, 1, 2}) {
    try {
      build_gcn(pt(0.0), cf, n);
      FAIL("expected level-too-small");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kLevelTooSmall);
    }
  }
}

TEST_CASE("G1: disjointness of orbit neighbourhoods") {
  const ContinuedFraction& cf = golden();
  G1Report same = check_G1({pt(0.3), pt(0.3)}, cf, 4, 9);
  CHECK_FALSE(same.passed);
  for (const G1Level& l : same.levels) CHECK_FALSE(l.disjoint);
  REQUIRE(same.first_failure);
  CHECK(same.first_failure->n == 4);

  G1Report shifted = check_G1({pt(0.3), pt(0.3) + cf.alpha_point.times(3)}, cf, 6, 10);
  CHECK_FALSE(shifted.passed);
  REQUIRE(shifted.levels.back().witness);
  GcnSet a = build_gcn(pt(0.3), cf, 10);
  GcnSet b = build_gcn(pt(0.3) + cf.alpha_point.times(3), cf, 10);
  CHECK(a.set.contains(*shifted.levels.back().witness));
  CHECK(b.set.contains(*shifted.levels.back().witness));

  // Pair pass rate against 1 - 2/ln^2 q_n, four standard errors.
  std::mt19937_64 gen(17);
  const int n = 8, pairs = 600;
  int pass = 0;
  for (int t = 0; t < pairs; ++t) {
    pass += check_G1({CirclePoint::from_raw(gen()), CirclePoint::from_raw(gen())}, cf, n, n).passed;
  }
  double rate = static_cast<double>(pass) / pairs;
  double l = std::log(static_cast<double>(cf.q(n)));
  double target = 1 - 2 / (l * l);
  CHECK(rate >= target - 4 * std::sqrt(target * (1 - target) / pairs));
}

TEST_CASE("G2: translated cover intersections") {
  const ContinuedFraction& cf = golden();
  std::vector<SmallSumCover> covers{compute_AN_cover(default_roof(), cf.alpha_point, 64, 0.01)};
  IntervalUnion A = covers[0].as_union();
  std::vector<CirclePoint> tuple{pt(0.11), pt(0.37), pt(0.52), pt(0.83)};
  G2Report one = check_G2(tuple, covers, 1);
  for (const G2Row& r : one.rows) {
    CHECK(r.measure == doctest::Approx(A.measure()).epsilon(1e-15));
    CHECK(r.measure <= 6 * std::pow(64.0, -1.0 / 15) * 1.1);
  }
  G2Report equal = check_G2({pt(0.2), pt(0.2), pt(0.2)}, covers, 3);
  CHECK(equal.rows[0].measure == doctest::Approx(A.measure()).epsilon(1e-15));
  // Adding a translate never enlarges the intersection.
  for (int s = 1; s < 4; ++s) {
    G2Report lo = check_G2(tuple, covers, s);
    for (const G2Row& big : check_G2(tuple, covers, s + 1).rows) {
      for (const G2Row& small : lo.rows) {
        if (std::includes(big.subset.begin(), big.subset.end(), small.subset.begin(), small.subset.end())) {
          CHECK(big.measure <= small.measure);
        }
      }
    }
  }
  G2Report three = check_G2(tuple, covers, 3);
  CHECK(three.passed);
  CHECK(three.rows.size() == 4);
}

TEST_CASE("G3: violation counts") {
  const KocherginFlow& flow = default_flow();
  BumpParameters bump;
  CirclePoint far = farthest_from_singularities(flow.roof.singularities);
  G3Witness clean = g3_violations(flow, bump, {far, 1.0}, 1e3);
  CHECK(clean.endpoint_violations.empty());
  CHECK(clean.window_violations.empty());

  // Start in the kappa-ball of c_2: one endpoint violation.
  CirclePoint near = flow.roof.singularities[2] + pt(0.5 * bump.kappa);
  G3Witness start = g3_violations(flow, bump, {near, 1.5}, 1e2);
  CHECK(std::count(start.endpoint_violations.begin(), start.endpoint_violations.end(), 2) == 1);

  // Arrange x + N alpha inside the shrinking interval of c_1.
  const double T = 1e3;
  FlowPoint x{pt(0.6), 0.5};
  for (int it = 0; it < 50; ++it) {
    std::int64_t N = evolve_counted(flow, x, T).n;
    CirclePoint target = flow.roof.singularities[1] + pt(1e-12) - flow.alpha().times(N);
    if (target == x.theta) break;
    x.theta = target;
  }
  G3Witness hit = g3_violations(flow, bump, x, T);
  CHECK(std::count(hit.window_violations.begin(), hit.window_violations.end(), 1) == 1);
  CHECK(hit.window_violations.size() == 1);

  G3Report rep = check_G3(flow, bump, {1e2, 1e3}, 300, 9);
  CHECK(rep.passed);
  CHECK(rep.max_violations <= 3);
  std::size_t total = 0;
  for (std::size_t h : rep.violation_histogram) total += h;
  CHECK(total == 600);
}

TEST_CASE("good-tuple search") {
  const ContinuedFraction& cf = golden();
  SearchOptions opt;
  opt.attempts = 6;
  opt.g3_samples = 40;
  opt.N_grid = {64};
  opt.seed = 5;
  auto a = search_good_tuples(default_roof(), cf, 4, opt);
  opt.workers = 3;
  auto b = search_good_tuples(default_roof(), cf, 4, opt);
  REQUIRE(a.size() == 6);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].tuple == b[i].tuple);
    CHECK(a[i].overall == b[i].overall);
    CHECK(a[i].overall == (a[i].g1.passed && a[i].g2.passed && a[i].g3.passed));
    CHECK(a[i].g1.levels.size() == 7);
  }
  std::vector<SmallSumCover> covers{compute_AN_cover(default_roof(), cf.alpha_point, 64, 0.01)};
  TupleVerdict dup = evaluate_tuple({pt(0.1), pt(0.4), pt(0.4), pt(0.8)}, default_roof(), cf, covers, opt, 3);
  CHECK_FALSE(dup.g1.passed);
  CHECK_FALSE(dup.overall);
  TupleVerdict single = evaluate_tuple({pt(0.4)}, default_roof(), cf, covers, opt, 3);
  CHECK(single.g1.passed);
  CHECK(single.g2.subset_size == 1);
}
