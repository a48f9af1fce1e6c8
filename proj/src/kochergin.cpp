#include "kochlab/kochergin.hpp"

#include <algorithm>
#include <cmath>

#include "kochlab/birkhoff.hpp"
#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/stats.hpp"

namespace kochlab {

double KocherginFlow::height(CirclePoint theta) const {
  for (CirclePoint c : roof.singularities) {
    if (circle_distance(theta, c) < kSingularityGuard) {
      raise(ErrorCode::kSingularity, "flow line hits a singular fiber");
    }
  }
  return eval_composite(roof, theta, 0);
}

KocherginFlow make_flow(ContinuedFraction cf, CompositeRoof roof, double class_constant) {
  KocherginFlow flow;
  flow.certificate = is_diophantine_D(cf, class_constant);
  flow.cf = std::move(cf);
  flow.roof = std::move(roof);
  return flow;
}

EvolveResult evolve_counted(const KocherginFlow& flow, FlowPoint p, double t) {
  if (!(std::fabs(t) <= flow.horizon)) {
    raise(ErrorCode::kHorizon, "evolution time exceeds the configured horizon");
  }
  EvolveResult r;
  CompensatedSum height;
  height += p.u;
  height += t;
  CirclePoint theta = p.theta;
  const CirclePoint alpha = flow.alpha();
  if (t >= 0) {
    for (;;) {
      double f = flow.height(theta);
      if (height.value() < f) break;
      height += -f;
      theta += alpha;
      ++r.n;
    }
  } else {
    while (height.value() < 0) {
      theta -= alpha;
      height += flow.height(theta);
      --r.n;
    }
  }
  r.point = {theta, std::max(0.0, height.value())};
  return r;
}

ReturnCount return_count(const KocherginFlow& flow, FlowPoint p, double T) {
  if (!(T > 0)) raise(ErrorCode::kDomain, "return count needs T > 0");
  EvolveResult r = evolve_counted(flow, p, T);
  return {static_cast<std::uint64_t>(r.n), r.point.u};
}

void for_each_segment(const KocherginFlow& flow, FlowPoint p, double T,
                      const std::function<void(CirclePoint, double, double, double)>& segment) {
  if (!(T >= 0)) raise(ErrorCode::kDomain, "segment walk needs T >= 0");
  if (T > flow.horizon) raise(ErrorCode::kHorizon, "evolution time exceeds the configured horizon");
  CirclePoint theta = p.theta;
  double u = p.u;
  CompensatedSum elapsed;
  for (;;) {
    double f = flow.height(theta);
    double remaining = T - elapsed.value();
    if (u + remaining < f) {
      segment(theta, u, u + remaining, elapsed.value());
      return;
    }
    segment(theta, u, f, elapsed.value());
    elapsed += f - u;
    u = 0.0;
    theta += flow.alpha();
  }
}

double product_distance(FlowPoint a, FlowPoint b) {
  return std::max(circle_distance(a.theta, b.theta), std::fabs(a.u - b.u));
}

FlowPoint sample_invariant_one(const KocherginFlow& flow, Rng& rng) {
  const SingularRoof& base = flow.roof.base;
  const int count = flow.roof.count();
  const double e = 1.0 - base.gamma;
  // Envelope sum_i a d_i^-g + K dominates f since the far term of each
  // singular profile is at most a 2^g.
  const double K = count * std::max(0.0, base.coeff_a * std::pow(2.0, base.gamma) + base.offset_b);
  const double cap_mass = 2.0 * base.coeff_a * std::pow(0.5, e) / e;
  const double total = K + count * cap_mass;
  for (;;) {
    double pick = rng.uniform() * total;
    CirclePoint theta;
    if (pick < K) {
      theta = CirclePoint::from_raw(rng.bits());
    } else {
      int i = std::min(count - 1, static_cast<int>((pick - K) / cap_mass));
      double d = 0.5 * std::pow(rng.uniform_open0(), 1.0 / e);
      CirclePoint off = CirclePoint::from_double(d);
      theta = (rng.uniform() < 0.5) ? flow.roof.singularities[i] + off
                                    : flow.roof.singularities[i] - off;
    }
    double envelope = K;
    bool too_close = false;
    for (CirclePoint c : flow.roof.singularities) {
      double d = circle_distance(theta, c);
      if (d < kSingularityGuard) too_close = true;
      envelope += base.coeff_a * std::pow(d, -base.gamma);
    }
    if (too_close) continue;
    double f = eval_composite(flow.roof, theta, 0);
    if (rng.uniform() * envelope <= f) return {theta, rng.uniform() * f};
  }
}

std::vector<FlowPoint> sample_invariant(const KocherginFlow& flow, std::uint64_t seed,
                                        std::size_t count, const ParallelOptions& options) {
  if (count == 0) raise(ErrorCode::kPrecondition, "sample count must be >= 1");
  std::vector<FlowPoint> out(count);
  parallel_chunks(count, options, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(seed, 0x5a3b1e, chunk));
    for (std::size_t i = b; i < e; ++i) out[i] = sample_invariant_one(flow, rng);
  });
  return out;
}

S3Report check_S3(const KocherginFlow& flow, FlowPoint x0, const std::vector<double>& delta_grid,
                  const S3Options& options) {
  if (!(options.m > 1.0 && options.m < 1.1)) raise(ErrorCode::kDomain, "S3 exponent m must lie in (1, 1.1)");
  S3Report rep;
  rep.m = options.m;
  rep.constant_C = options.constant_C;
  rep.passed = true;
  for (double delta : delta_grid) {
    S3Row row;
    row.delta = delta;
    double cd = options.constant_C * delta;
    row.t_min = cd;
    row.t_max = std::pow(cd, -1.0 / options.m);
    if (!(row.t_min < row.t_max)) {
      raise(ErrorCode::kWindowEmpty, "S3 time window is empty for delta = " + std::to_string(delta));
    }
    if (x0.u - delta < 0 || x0.u + delta >= flow.roof.inf_value) {
      raise(ErrorCode::kPrecondition, "S3 ball leaves the band below inf f");
    }
    // Logarithmic time grid on the window, both directions.
    std::vector<double> times;
    for (int k = 0; k < options.time_points; ++k) {
      double s = options.time_points == 1 ? 0.0 : static_cast<double>(k) / (options.time_points - 1);
      double t = row.t_min * std::pow(row.t_max / row.t_min, s);
      t = std::clamp(t, row.t_min * (1 + 1e-12), row.t_max * (1 - 1e-12));
      times.push_back(t);
      times.push_back(-t);
    }
    std::size_t chunks = (options.samples + 63) / 64;
    std::vector<double> clearance(chunks, INFINITY);
    parallel_chunks(options.samples, {options.workers, 64},
                    [&](std::size_t chunk, std::size_t b, std::size_t e) {
                      Rng rng(derive_seed(options.seed, 0x53, chunk));
                      for (std::size_t i = b; i < e; ++i) {
                        FlowPoint y{x0.theta + CirclePoint::from_double((2 * rng.uniform() - 1) * delta),
                                    x0.u + (2 * rng.uniform() - 1) * delta};
                        for (double t : times) {
                          FlowPoint z = evolve(flow, y, t);
                          clearance[chunk] = std::min(clearance[chunk], product_distance(z, x0) - delta);
                        }
                      }
                    });
    row.trials = options.samples * times.size();
    row.min_clearance = *std::min_element(clearance.begin(), clearance.end());
    row.passed = row.min_clearance > 0;
    rep.passed = rep.passed && row.passed;
    rep.rows.push_back(row);
  }
  return rep;
}

double SeparableObservable::operator()(FlowPoint p) const {
  if (p.u > fiber_top) return 0.0;
  return base(p.theta.value()) * fiber(p.u);
}

double SeparableObservable::orbit_integral(const KocherginFlow& flow, FlowPoint p, double T) const {
  CompensatedSum total;
  auto W = [&](double u) { return fiber_antiderivative(std::min(u, fiber_top)); };
  for_each_segment(flow, p, T, [&](CirclePoint theta, double from, double to, double) {
    if (from >= fiber_top) return;
    total += base(theta.value()) * (W(to) - W(from));
  });
  return total.value();
}

SeparableObservable cosine_bump_observable(double top) {
  // w(u) = c (u (top - u))^4 normalised to unit integral; W is its antiderivative.
  double norm = std::pow(top, 9) / 630.0;
  double c = 1.0 / norm;
  SeparableObservable h;
  h.fiber_top = top;
  h.base = [](double x) { return std::cos(2.0 * M_PI * x); };
  h.fiber = [c, top](double u) {
    if (u <= 0 || u >= top) return 0.0;
    double v = u * (top - u);
    return c * v * v * v * v;
  };
  h.fiber_antiderivative = [c, top](double u) {
    u = std::clamp(u, 0.0, top);
    // Integral of u^4 (top - u)^4 expanded in powers of u.
    double a = top;
    double poly = std::pow(a, 4) * std::pow(u, 5) / 5 - 4 * std::pow(a, 3) * std::pow(u, 6) / 6 +
                  6 * a * a * std::pow(u, 7) / 7 - 4 * a * std::pow(u, 8) / 8 + std::pow(u, 9) / 9;
    return c * poly;
  };
  return h;
}

SeparableObservable zero_observable() {
  SeparableObservable h;
  h.base = [](double) { return 0.0; };
  h.fiber = [](double) { return 0.0; };
  h.fiber_antiderivative = [](double) { return 0.0; };
  h.fiber_top = 0.0;
  return h;
}

S1Report check_S1_empirical(const KocherginFlow& flow, const SeparableObservable& H,
                            const std::vector<double>& T_grid, std::size_t samples,
                            std::uint64_t seed, const ParallelOptions& options) {
  if (H.fiber_top > flow.roof.inf_value) {
    raise(ErrorCode::kPrecondition, "S1 observable must live below inf f");
  }
  S1Report rep;
  auto base_mean = integrate_adaptive(H.base, 0.0, 1.0, 1e-14, 1e-14).value;
  rep.mean_check = base_mean * H.fiber_antiderivative(H.fiber_top) / flow.roof.count();
  if (std::fabs(rep.mean_check) > 1e-6) {
    raise(ErrorCode::kPrecondition, "S1 observable is not mean zero");
  }
  std::vector<FlowPoint> starts = sample_invariant(flow, seed, samples, options);
  std::vector<double> Ts, q90s;
  for (double T : T_grid) {
    std::vector<double> stat(samples);
    parallel_chunks(samples, options, [&](std::size_t, std::size_t b, std::size_t e) {
      for (std::size_t i = b; i < e; ++i) {
        stat[i] = std::fabs(H.orbit_integral(flow, starts[i], T)) / std::sqrt(T);
      }
    });
    S1Row row;
    row.T = T;
    row.median = quantile(stat, 0.5);
    row.q90 = quantile(stat, 0.9);
    rep.rows.push_back(row);
    if (row.q90 > 0) {
      Ts.push_back(std::log(T));
      q90s.push_back(std::log(row.q90));
    }
  }
  if (Ts.size() >= 2) rep.slope = fit_line(Ts, q90s).slope;
  bool all_zero = q90s.empty();
  rep.passed = all_zero || rep.slope <= -0.05;
  return rep;
}

}  // namespace kochlab
