#include "kochlab/tuples.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "kochlab/error.hpp"

namespace kochlab {

GcnSet build_gcn(CirclePoint c, const ContinuedFraction& cf, int n) {
  if (n < 3) raise(ErrorCode::kLevelTooSmall, "G(c, n) needs n >= 3");
  if (n + 1 > cf.depth()) raise(ErrorCode::kDepthInsufficient, "G(c, n) needs q_{n+1}");
  GcnSet g;
  g.center = c;
  g.level = n;
  g.q_n = cf.q(n);
  g.q_next = cf.q(n + 1);
  if (g.q_n < 2) raise(ErrorCode::kLevelTooSmall, "G(c, n) needs q_n >= 2");
  double l = std::log(static_cast<double>(g.q_n));
  g.radius = 1.0 / (static_cast<double>(g.q_n) * std::pow(l, 5));
  g.arc_count = 4 * g.q_next + 1;
  g.unmerged_measure = static_cast<double>(g.arc_count) * 2 * g.radius;
  const std::int64_t K = static_cast<std::int64_t>(2 * g.q_next);
  for (std::int64_t k = -K; k <= K; ++k) g.set.add_ball(c + cf.alpha_point.times(k), g.radius);
  return g;
}

G1Report check_G1(const std::vector<CirclePoint>& tuple, const ContinuedFraction& cf, int n_lo, int n_hi) {
  if (n_lo > n_hi) raise(ErrorCode::kDomain, "empty level range");
  G1Report rep;
  for (int n = n_lo; n <= n_hi; ++n) {
    std::vector<GcnSet> sets;
    for (CirclePoint c : tuple) sets.push_back(build_gcn(c, cf, n));
    G1Level level;
    level.n = n;
    for (std::size_t i = 0; i < sets.size() && level.disjoint; ++i) {
      for (std::size_t j = i + 1; j < sets.size(); ++j) {
        IntervalUnion common = sets[i].set.intersect(sets[j].set);
        if (!common.empty()) {
          level.disjoint = false;
          level.first_i = static_cast<int>(i);
          level.first_j = static_cast<int>(j);
          level.witness = common.witness();
          break;
        }
      }
    }
    if (!level.disjoint && !rep.first_failure) rep.first_failure = level;
    rep.all_levels = rep.all_levels && level.disjoint;
    rep.levels.push_back(level);
  }
  rep.passed = rep.levels.back().disjoint;
  return rep;
}

namespace {

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  if (k > n || k <= 0) return;
  for (;;) {
    visit(idx);
    int i = k - 1;
    while (i >= 0 && idx[i] == n - k + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int m = i + 1; m < k; ++m) idx[m] = idx[m - 1] + 1;
  }
}

}  // namespace

G2Report check_G2(const std::vector<CirclePoint>& tuple, const std::vector<SmallSumCover>& covers,
                  int subset_size) {
  if (subset_size < 1 || subset_size > static_cast<int>(tuple.size())) {
    raise(ErrorCode::kDomain, "subset size must lie in [1, tuple size]");
  }
  G2Report rep;
  rep.subset_size = subset_size;
  rep.passed = true;
  for (const SmallSumCover& cover : covers) {
    IntervalUnion A = cover.as_union();
    const double N = static_cast<double>(cover.N);
    const double single = 2 * 3 * N * cover.radius;
    for_each_subset(static_cast<int>(tuple.size()), subset_size, [&](const std::vector<int>& sub) {
      G2Row row;
      row.N = cover.N;
      row.subset = sub;
      std::vector<CirclePoint> shifts;
      for (int i : sub) shifts.push_back(tuple[i]);
      row.measure = translate_intersection_measure(A, shifts);
      row.prediction = std::pow(single, subset_size) * std::pow(std::log(N), 2);
      row.paper_target = std::pow(N, -6.0);
      row.within_prediction = row.measure <= row.prediction;
      row.meets_paper_target = row.measure <= row.paper_target;
      rep.passed = rep.passed && row.within_prediction;
      rep.rows.push_back(row);
    });
  }
  return rep;
}

G2Report check_G2(const std::vector<CirclePoint>& tuple, const SingularRoof& roof, const ContinuedFraction& cf,
                  const std::vector<std::uint64_t>& N_grid, double epsilon, int subset_size) {
  std::vector<SmallSumCover> covers;
  for (std::uint64_t N : N_grid) covers.push_back(compute_AN_cover(roof, cf.alpha_point, N, epsilon));
  return check_G2(tuple, covers, subset_size);
}

namespace {

bool in_lifted_ball(const KocherginFlow& flow, const BumpParameters& bump, FlowPoint p, CirclePoint c) {
  if (circle_distance(p.theta, c) > bump.kappa) return false;
  double f = flow.height(p.theta);
  double margin = std::max(0.0, bump.margin - std::min(p.u, f - p.u));
  return margin <= bump.kappa;
}

}  // namespace

G3Witness g3_violations(const KocherginFlow& flow, const BumpParameters& bump, FlowPoint x, double T) {
  G3Witness w;
  w.start = x;
  w.T = T;
  EvolveResult end = evolve_counted(flow, x, T);
  const auto& cs = flow.roof.singularities;
  const double gamma = flow.roof.base.gamma;
  const double Tg = std::pow(T, gamma);
  const double radius = 1.0 / (2 * Tg * std::pow(std::log(T), 7));
  const std::int64_t reach = static_cast<std::int64_t>(std::floor(2 * Tg));
  const CirclePoint base = x.theta + flow.alpha().times(end.n);
  for (int j = 0; j < static_cast<int>(cs.size()); ++j) {
    if (in_lifted_ball(flow, bump, x, cs[j]) || in_lifted_ball(flow, bump, end.point, cs[j])) {
      w.endpoint_violations.push_back(j);
    }
    for (std::int64_t u = -reach; u <= reach; ++u) {
      if (circle_distance(base + flow.alpha().times(u), cs[j]) <= radius) {
        w.window_violations.push_back(j);
        break;
      }
    }
  }
  return w;
}

namespace {

std::size_t violating_count(const G3Witness& w) {
  std::vector<int> all = w.endpoint_violations;
  all.insert(all.end(), w.window_violations.begin(), w.window_violations.end());
  std::sort(all.begin(), all.end());
  return static_cast<std::size_t>(std::unique(all.begin(), all.end()) - all.begin());
}

}  // namespace

G3Report check_G3(const KocherginFlow& flow, const BumpParameters& bump, const std::vector<double>& T_grid,
                  std::size_t samples, std::uint64_t seed, const ParallelOptions& options) {
  G3Report rep;
  rep.samples = samples;
  rep.T_grid = T_grid;
  const std::size_t width = flow.roof.singularities.size() + 1;
  rep.violation_histogram.assign(width, 0);
  std::vector<FlowPoint> starts = sample_invariant(flow, seed, samples, options);
  std::vector<std::vector<G3Witness>> results(samples);
  parallel_chunks(samples, options, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (double T : T_grid) results[i].push_back(g3_violations(flow, bump, starts[i], T));
    }
  });
  std::size_t ok = 0, total = 0;
  for (const auto& per_sample : results) {
    for (const G3Witness& w : per_sample) {
      std::size_t v = violating_count(w);
      ++rep.violation_histogram[v];
      rep.max_violations = std::max(rep.max_violations, v);
      ++total;
      if (v <= 3) ++ok; else rep.witnesses.push_back(w);
    }
  }
  rep.pass_fraction = total == 0 ? 1.0 : static_cast<double>(ok) / total;
  rep.passed = rep.witnesses.empty();
  return rep;
}

TupleVerdict evaluate_tuple(const std::vector<CirclePoint>& tuple, const SingularRoof& roof,
                            const ContinuedFraction& cf, const std::vector<SmallSumCover>& covers,
                            const SearchOptions& options, std::uint64_t g3_seed) {
  TupleVerdict v;
  v.tuple = tuple;
  const int count = static_cast<int>(tuple.size());
  if (count >= 2) {
    v.g1 = check_G1(tuple, cf, options.n_lo, options.n_hi);
  } else {
    v.g1.passed = true;
  }
  v.g2 = check_G2(tuple, covers, std::max(1, count - 3));
  std::vector<CirclePoint> sorted = tuple;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
    // Coinciding singularities admit no flow; G3 is reported as not run.
    v.g3.T_grid = options.T_grid;
    v.overall = false;
    return v;
  }
  KocherginFlow flow = make_flow(cf, make_composite_roof(roof, tuple));
  v.g3 = check_G3(flow, options.bump, options.T_grid, options.g3_samples, g3_seed);
  v.overall = v.g1.passed && v.g2.passed && v.g3.passed;
  return v;
}

std::vector<TupleVerdict> search_good_tuples(const SingularRoof& roof, const ContinuedFraction& cf, int count,
                                             const SearchOptions& options) {
  if (options.attempts < 1) raise(ErrorCode::kPrecondition, "attempts must be >= 1");
  if (count < 1) raise(ErrorCode::kDomain, "tuple size must be >= 1");
  std::vector<SmallSumCover> covers;
  for (std::uint64_t N : options.N_grid) {
    covers.push_back(compute_AN_cover(roof, cf.alpha_point, N, options.epsilon, {10.0, options.workers}));
  }
  std::vector<TupleVerdict> out(options.attempts);
  parallel_chunks(options.attempts, {options.workers, 1}, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    for (std::size_t a = b; a < e; ++a) {
      Rng rng(derive_seed(options.seed, 0x7091e, chunk));
      std::vector<CirclePoint> tuple;
      for (int i = 0; i < count; ++i) tuple.push_back(CirclePoint::from_raw(rng.bits()));
      out[a] = evaluate_tuple(tuple, roof, cf, covers, options, rng.bits());
    }
  });
  return out;
}

}  // namespace kochlab
