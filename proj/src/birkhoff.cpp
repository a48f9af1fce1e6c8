#include "kochlab/birkhoff.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>

#include "kochlab/error.hpp"
#include "kochlab/random.hpp"
#include "kochlab/stats.hpp"

namespace kochlab {

std::vector<BvObservable> reference_bv_observables() {
  std::vector<BvObservable> out;
  out.push_back({"half_indicator", [](double x) { return x < 0.5 ? 0.5 : -0.5; }, 0.0, 2.0});
  out.push_back({"sawtooth", [](double x) { return x - 0.5; }, 0.0, 2.0});
  out.push_back({"tent", [](double x) { return std::fabs(2.0 * x - 1.0) - 0.5; }, 0.0, 2.0});
  out.push_back({"two_steps",
                 [](double x) {
                   double v = 0.0;
                   if (x >= 0.1 && x < 0.3) v += 1.0;
                   if (x >= 0.55 && x < 0.6) v -= 2.0;
                   return v;
                 },
                 0.1, 6.0});
  out.push_back({"cosine", [](double x) { return std::cos(2.0 * M_PI * x); }, 0.0, 4.0});
  return out;
}

BvObservable constant_observable(double value) {
  return {"constant", [value](double) { return value; }, value, 0.0};
}

std::vector<CirclePoint> uniform_grid(std::size_t count) {
  std::vector<CirclePoint> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(CirclePoint::from_double((i + 0.5) / static_cast<double>(count)));
  }
  return out;
}

namespace {

void guard_orbit_point(CirclePoint p, std::uint64_t j) {
  if (p.norm() < kSingularityGuard) {
    raise(ErrorCode::kSingularity, "orbit hits the singularity at j = " + std::to_string(j));
  }
}

}  // namespace

double ergodic_sum(const ErgodicSumQuery& q, const SingularRoof& roof, const BvObservable* custom) {
  if (q.N == 0) raise(ErrorCode::kDomain, "ergodic sum length must be >= 1");
  CompensatedSum sum;
  CirclePoint p = q.x;
  for (std::uint64_t j = 0; j < q.N; ++j, p += q.alpha) {
    switch (q.kind) {
      case ObservableKind::kRoof:
        guard_orbit_point(p, j);
        sum += eval_roof(roof, p, 0);
        break;
      case ObservableKind::kRoofCentered:
        guard_orbit_point(p, j);
        sum += eval_roof(roof, p, 0) - 1.0;
        break;
      case ObservableKind::kRoofDeriv1:
        guard_orbit_point(p, j);
        sum += eval_roof(roof, p, 1);
        break;
      case ObservableKind::kRoofDeriv2:
        guard_orbit_point(p, j);
        sum += eval_roof(roof, p, 2);
        break;
      case ObservableKind::kBvCustom:
        if (!custom) raise(ErrorCode::kPrecondition, "custom observable missing");
        sum += custom->fn(p.value());
        break;
    }
  }
  return sum.value();
}

DenjoyKoksmaReport check_denjoy_koksma(const BvObservable& h, const ContinuedFraction& cf, int n,
                                       const std::vector<CirclePoint>& grid) {
  if (n < 0 || n > cf.depth()) raise(ErrorCode::kDepthInsufficient, "level outside expansion");
  DenjoyKoksmaReport r;
  r.observable = h.name;
  r.level = n;
  r.q_n = cf.q(n);
  r.bound = 2.0 * h.variation;
  double expected = static_cast<double>(r.q_n) * h.mean;
  for (CirclePoint x : grid) {
    double s = ergodic_sum([&](CirclePoint p) { return h.fn(p.value()); }, x, r.q_n, cf.alpha_point);
    r.max_deviation = std::max(r.max_deviation, std::fabs(s - expected));
  }
  r.passed = r.max_deviation <= r.bound + 1e-9;
  return r;
}

namespace {

// Runs `visit(x_index, N_index, partial_state)` for every grid point along an
// incrementally extended orbit; the per-step accumulator is supplied by `step`.
template <class State, class Step, class Visit>
void scan_orbits(const std::vector<std::uint64_t>& N_grid, const std::vector<CirclePoint>& x_grid,
                 CirclePoint alpha, int workers, Step step, Visit visit) {
  for (std::size_t k = 1; k < N_grid.size(); ++k) {
    if (N_grid[k] <= N_grid[k - 1]) raise(ErrorCode::kDomain, "N grid must be increasing");
  }
  if (N_grid.empty() || N_grid.front() == 0) raise(ErrorCode::kDomain, "N grid must be positive");
  parallel_chunks(x_grid.size(), {workers, 8}, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      State state;
      CirclePoint p = x_grid[i];
      std::uint64_t j = 0;
      for (std::size_t k = 0; k < N_grid.size(); ++k) {
        for (; j < N_grid[k]; ++j, p += alpha) step(state, p, j);
        visit(i, k, state);
      }
    }
  });
}

double log_slope(const std::vector<ScanRow>& rows) {
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (r.value > 0) {
      lx.push_back(std::log(static_cast<double>(r.N)));
      ly.push_back(std::log(r.value));
    }
  }
  if (lx.size() < 2) return 0.0;
  return fit_line(lx, ly).slope;
}

}  // namespace

ResidualScanReport dk0_residual_scan(const SingularRoof& roof, const ContinuedFraction& cf,
                                     const std::vector<std::uint64_t>& N_grid,
                                     const std::vector<CirclePoint>& x_grid, double calibration,
                                     int workers) {
  struct State {
    CompensatedSum sum;
    double min_dist = INFINITY;
    double value_at_min = 0.0;
  };
  std::vector<double> ratio(N_grid.size() * x_grid.size());
  std::vector<double> residual(ratio.size());
  scan_orbits<State>(
      N_grid, x_grid, cf.alpha_point, workers,
      [&](State& s, CirclePoint p, std::uint64_t j) {
        guard_orbit_point(p, j);
        double v = eval_roof(roof, p, 0);
        s.sum += v;
        double d = p.norm();
        if (d < s.min_dist) {
          s.min_dist = d;
          s.value_at_min = v;
        }
      },
      [&](std::size_t i, std::size_t k, const State& s) {
        double N = static_cast<double>(N_grid[k]);
        // Remove the spike first so the cancellation happens before adding N.
        double R = std::fabs((s.sum.value() - s.value_at_min) - N);
        double norm = roof.asymptotic_A * std::pow(N, roof.gamma) * std::pow(std::log(N), 5);
        residual[k * x_grid.size() + i] = R;
        ratio[k * x_grid.size() + i] = N >= 2 ? R / norm : 0.0;
      });
  ResidualScanReport rep;
  rep.calibration = calibration;
  for (std::size_t k = 0; k < N_grid.size(); ++k) {
    ScanRow row;
    row.N = N_grid[k];
    double N = static_cast<double>(row.N);
    row.reference = roof.asymptotic_A * std::pow(N, roof.gamma) * std::pow(std::log(N), 5);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      row.value = std::max(row.value, ratio[k * x_grid.size() + i]);
      row.raw = std::max(row.raw, residual[k * x_grid.size() + i]);
    }
    rep.max_ratio = std::max(rep.max_ratio, row.value);
    rep.rows.push_back(row);
  }
  rep.slope = log_slope(rep.rows);
  rep.passed = rep.slope <= 0.05 && (calibration <= 0 || rep.max_ratio <= 2.0 * calibration);
  return rep;
}

LowerBoundReport second_derivative_lower_bound(const SingularRoof& roof, const ContinuedFraction& cf,
                                               const std::vector<std::uint64_t>& N_grid,
                                               const std::vector<CirclePoint>& x_grid,
                                               std::uint64_t N0, int workers) {
  struct State {
    CompensatedSum sum;
  };
  std::vector<double> sums(N_grid.size() * x_grid.size());
  scan_orbits<State>(
      N_grid, x_grid, cf.alpha_point, workers,
      [&](State& s, CirclePoint p, std::uint64_t j) {
        guard_orbit_point(p, j);
        s.sum += eval_roof(roof, p, 2);
      },
      [&](std::size_t i, std::size_t k, const State& s) {
        sums[k * x_grid.size() + i] = s.sum.value();
      });
  LowerBoundReport rep;
  rep.N0 = N0;
  rep.passed = true;
  for (std::size_t k = 0; k < N_grid.size(); ++k) {
    ScanRow row;
    row.N = N_grid[k];
    double N = static_cast<double>(row.N);
    row.reference = N >= 2 ? roof.asymptotic_A * std::pow(N, 2.0 + roof.gamma) /
                                 std::pow(std::log(N), 10)
                           : 0.0;
    row.value = INFINITY;
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      row.value = std::min(row.value, sums[k * x_grid.size() + i]);
    }
    row.raw = row.value;
    if (row.N >= N0 && row.value < row.reference) rep.passed = false;
    rep.rows.push_back(row);
  }
  return rep;
}

BvSumReport bv_sum_scan(const BvObservable& h, const ContinuedFraction& cf,
                        const std::vector<std::uint64_t>& N_grid,
                        const std::vector<CirclePoint>& x_grid, int workers) {
  struct State {
    CompensatedSum sum;
  };
  std::vector<double> dev(N_grid.size() * x_grid.size());
  scan_orbits<State>(
      N_grid, x_grid, cf.alpha_point, workers,
      [&](State& s, CirclePoint p, std::uint64_t) { s.sum += h.fn(p.value()); },
      [&](std::size_t i, std::size_t k, const State& s) {
        dev[k * x_grid.size() + i] =
            std::fabs(s.sum.value() - static_cast<double>(N_grid[k]) * h.mean);
      });
  BvSumReport rep;
  for (std::size_t k = 0; k < N_grid.size(); ++k) {
    ScanRow row;
    row.N = N_grid[k];
    double l = std::log(static_cast<double>(row.N));
    row.reference = std::pow(l, 4);
    for (std::size_t i = 0; i < x_grid.size(); ++i) {
      row.raw = std::max(row.raw, dev[k * x_grid.size() + i]);
    }
    row.value = row.N >= 2 ? row.raw / row.reference : 0.0;
    rep.max_ratio = std::max(rep.max_ratio, row.value);
    rep.rows.push_back(row);
  }
  rep.slope = log_slope(rep.rows);
  return rep;
}

IntervalUnion SmallSumCover::as_union() const {
  IntervalUnion u;
  for (CirclePoint c : centers) u.add_ball(c, radius);
  return u;
}

SmallSumCover compute_AN_cover(const SingularRoof& roof, CirclePoint alpha, std::uint64_t N,
                               double epsilon, const CoverOptions& options) {
  if (N < 1) raise(ErrorCode::kDomain, "cover needs N >= 1");
  if (!(epsilon > 0.0 && epsilon <= 0.05)) raise(ErrorCode::kDomain, "cover epsilon must lie in (0, 0.05]");
  SmallSumCover cover;
  cover.N = N;
  cover.epsilon = epsilon;
  double Nd = static_cast<double>(N);
  cover.threshold = std::pow(Nd, roof.gamma * roof.gamma + epsilon);
  cover.radius = std::pow(Nd, -(1.0 + roof.gamma / 5.0));

  std::vector<CirclePoint> cuts;
  cuts.reserve(N);
  CirclePoint p;
  for (std::uint64_t i = 0; i < N; ++i, p -= alpha) cuts.push_back(p);
  std::sort(cuts.begin(), cuts.end());

  auto sum_at = [&](CirclePoint x, int order) {
    return ergodic_sum([&](CirclePoint y) { return eval_roof(roof, y, order); }, x, N, alpha);
  };
  const std::uint64_t radius_raw = arc_raw(cover.radius);
  // Well inside the required delta_N / 100 bracket; costs a few more halvings.
  const std::uint64_t tol_raw = std::max<std::uint64_t>(1, radius_raw / 1000000);

  std::vector<std::vector<CirclePoint>> per_interval(N);
  parallel_chunks(N, {options.workers, 16}, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t j = b; j < e; ++j) {
      CirclePoint left = cuts[j];
      std::uint64_t span = N == 1 ? ~std::uint64_t{0} : (cuts[(j + 1) % N] - left).raw();
      std::uint64_t lo = 0, hi = span;
      while (hi - lo > tol_raw) {
        std::uint64_t mid = lo + (hi - lo) / 2;
        if (sum_at(left + CirclePoint::from_raw(mid), 1) < 0) lo = mid; else hi = mid;
      }
      // The derivative runs from -inf to +inf across the interval, so the
      // bracket must have left both singular ends.
      if (span > 2 * tol_raw && (lo == 0 || hi == span)) {
        raise(ErrorCode::kBisectionFailure,
              "derivative of the ergodic sum does not change sign on partition interval " +
                  std::to_string(j));
      }
      std::uint64_t zero = lo + (hi - lo) / 2;
      auto& out = per_interval[j];
      out.push_back(left + CirclePoint::from_raw(zero));
      if (zero > radius_raw) {
        CirclePoint x = left + CirclePoint::from_raw(zero - radius_raw);
        if (sum_at(x, 0) - Nd < cover.threshold) out.push_back(x);
      }
      if (span - zero > radius_raw) {
        CirclePoint x = left + CirclePoint::from_raw(zero + radius_raw);
        if (sum_at(x, 0) - Nd < cover.threshold) out.push_back(x);
      }
    }
  });
  for (auto& v : per_interval) cover.centers.insert(cover.centers.end(), v.begin(), v.end());

  // Grid verification of the covering property and of Leb(A_N).
  std::vector<CirclePoint> sorted_centers = cover.centers;
  std::sort(sorted_centers.begin(), sorted_centers.end());
  auto covered = [&](CirclePoint x) {
    auto it = std::lower_bound(sorted_centers.begin(), sorted_centers.end(), x);
    CirclePoint after = it == sorted_centers.end() ? sorted_centers.front() : *it;
    CirclePoint before = it == sorted_centers.begin() ? sorted_centers.back() : *(it - 1);
    return circle_distance(x, after) <= cover.radius || circle_distance(x, before) <= cover.radius;
  };
  std::size_t G = static_cast<std::size_t>(std::ceil(options.grid_factor * std::pow(Nd, 1.3)));
  cover.grid_points = G;
  std::size_t chunk = 1024;
  std::size_t chunks = (G + chunk - 1) / chunk;
  std::vector<std::size_t> hits(chunks, 0), escapes(chunks, 0);
  parallel_chunks(G, {options.workers, static_cast<int>(chunk)},
                  [&](std::size_t c, std::size_t b, std::size_t e) {
                    for (std::size_t i = b; i < e; ++i) {
                      CirclePoint x = CirclePoint::from_double((i + 0.5) / static_cast<double>(G));
                      double s = sum_at(x, 0) - Nd;
                      if (std::fabs(s) <= cover.threshold) {
                        ++hits[c];
                        if (!covered(x)) ++escapes[c];
                      }
                    }
                  });
  for (std::size_t c = 0; c < chunks; ++c) {
    cover.grid_hits += hits[c];
    cover.escapes += escapes[c];
  }
  cover.measured_A_N = static_cast<double>(cover.grid_hits) / static_cast<double>(G);
  cover.cover_measure = cover.as_union().measure();
  return cover;
}

FewTranslatesReport few_translates_check(const IntervalUnion& set, int subset_size, std::size_t samples,
                                         std::uint64_t seed, const ParallelOptions& options) {
  if (subset_size < 1) raise(ErrorCode::kDomain, "translate count must be >= 1");
  if (samples < 2) raise(ErrorCode::kPrecondition, "translate average needs at least two samples");
  FewTranslatesReport rep;
  rep.subset_size = subset_size;
  rep.samples = samples;
  rep.set_measure = set.measure();
  rep.expected = std::pow(rep.set_measure, subset_size);
  std::vector<double> values(samples);
  parallel_chunks(samples, options, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(seed, 0x7a45, chunk));
    std::vector<CirclePoint> shifts(subset_size);
    for (std::size_t i = b; i < e; ++i) {
      for (CirclePoint& t : shifts) t = CirclePoint::from_raw(rng.bits());
      values[i] = translate_intersection_measure(set, shifts);
    }
  });
  Moments m = moments(values);
  rep.mean = m.mean;
  rep.standard_error = std::sqrt(m.variance / static_cast<double>(samples));
  rep.z_score = rep.standard_error > 0 ? (rep.mean - rep.expected) / rep.standard_error : 0.0;
  rep.passed = std::fabs(rep.mean - rep.expected) <= 5 * rep.standard_error ||
               (rep.standard_error == 0 && rep.mean == rep.expected);
  return rep;
}

}  // namespace kochlab
