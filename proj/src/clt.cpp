#include "kochlab/clt.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/stats.hpp"

namespace kochlab {

namespace {

constexpr std::uint64_t kCltStream = 0xc17;
constexpr std::uint64_t kVarianceStream = 0x5e41e5;
constexpr std::uint64_t kFiberCorrStream = 0xf1be7;
constexpr double kWindowRamp = 0.1;

// Signed representative of x in [-1/2, 1/2).
double signed_offset(CirclePoint x) {
  return x.raw() >= (std::uint64_t{1} << 63) ? -x.complement() : x.value();
}

void apply(std::int64_t m11, std::int64_t m12, std::int64_t m21, std::int64_t m22, FiberPoint& q) {
  std::uint64_t a = q.y1.raw(), b = q.y2.raw();
  std::uint64_t na = static_cast<std::uint64_t>(m11) * a + static_cast<std::uint64_t>(m12) * b;
  std::uint64_t nb = static_cast<std::uint64_t>(m21) * a + static_cast<std::uint64_t>(m22) * b;
  q.y1 = CirclePoint::from_raw(na);
  q.y2 = CirclePoint::from_raw(nb);
}

}  // namespace

FiberFlow make_fiber_flow(std::int64_t a11, std::int64_t a12, std::int64_t a21, std::int64_t a22, double rho) {
  if (a11 * a22 - a12 * a21 != 1) raise(ErrorCode::kDomain, "fiber automorphism must have determinant 1");
  if (std::llabs(a11 + a22) <= 2) raise(ErrorCode::kDomain, "fiber automorphism must be hyperbolic (|trace| > 2)");
  if (!(rho > 0.0 && rho < 1.0)) raise(ErrorCode::kDomain, "fiber roof amplitude must lie in (0, 1)");
  FiberFlow f;
  f.a11 = a11;
  f.a12 = a12;
  f.a21 = a21;
  f.a22 = a22;
  f.rho = rho;
  return f;
}

FiberPoint fiber_evolve(const FiberFlow& fiber, FiberPoint q, double t) {
  if (!std::isfinite(t)) raise(ErrorCode::kDomain, "fiber time must be finite");
  if (std::fabs(t) > fiber.horizon) raise(ErrorCode::kHorizon, "fiber time exceeds the configured horizon");
  if (t >= 0) {
    for (;;) {
      double r = fiber.roof(q.y1);
      if (q.v + t < r) {
        q.v += t;
        return q;
      }
      t -= r - q.v;
      apply(fiber.a11, fiber.a12, fiber.a21, fiber.a22, q);
      q.v = 0.0;
    }
  }
  for (;;) {
    if (q.v + t >= 0) {
      q.v += t;
      double r = fiber.roof(q.y1);
      if (q.v >= r) q.v = std::nextafter(r, 0.0);
      return q;
    }
    t += q.v;
    apply(fiber.a22, -fiber.a12, -fiber.a21, fiber.a11, q);
    q.v = fiber.roof(q.y1);
  }
}

FiberPoint sample_fiber(const FiberFlow& fiber, Rng& rng) {
  for (;;) {
    FiberPoint q;
    q.y1 = CirclePoint::from_raw(rng.bits());
    q.y2 = CirclePoint::from_raw(rng.bits());
    double r = fiber.roof(q.y1);
    if (rng.uniform() * (1.0 + fiber.rho) < r) {
      q.v = rng.uniform() * r;
      return q;
    }
  }
}

double fiber_window(double v) {
  if (v <= 0.0 || v >= 0.5) return 0.0;
  return smooth_step(v / kWindowRamp) * smooth_step((0.5 - v) / kWindowRamp);
}

double fiber_observable(FiberPoint q) {
  return std::sin(2 * M_PI * q.y1.value()) * fiber_window(q.v);
}

double fiber_observable_norm2() {
  // Mean r is 1 and sin^2 averages to 1/2.
  static const double value =
      0.5 * integrate_adaptive([](double v) { return fiber_window(v) * fiber_window(v); }, 0.0, 0.5, 1e-15, 1e-14).value;
  return value;
}

double ThetaBump::base_factor(CirclePoint theta) const {
  double d = signed_offset(theta - center.theta);
  double sum = 0.0;
  for (int m = -lattice_radius; m <= lattice_radius; ++m) {
    double x = (d + m) / delta;
    sum += std::exp(-x * x);
  }
  return sum;
}

double ThetaBump::operator()(FlowPoint x) const {
  if (x.u < 0.0) return 0.0;
  double z = (x.u - center.u) / delta;
  return base_factor(x.theta) * std::exp(-z * z);
}

double ThetaBump::fiber_mass(CirclePoint theta, double u1, double u2) const {
  u1 = std::max(u1, 0.0);
  if (u2 <= u1) return 0.0;
  const double half = 0.5 * delta * std::sqrt(M_PI);
  return base_factor(theta) * half * (std::erf((u2 - center.u) / delta) - std::erf((u1 - center.u) / delta));
}

double ThetaBump::total_mass() const {
  const double root = delta * std::sqrt(M_PI);
  return root * 0.5 * root * (1.0 + std::erf(center.u / delta));
}

ThetaPropertyReport theta_properties(const KocherginFlow& flow, FlowPoint center,
                                     const std::vector<double>& delta_grid,
                                     const std::vector<double>& d_grid, double tolerance) {
  ThetaPropertyReport rep;
  rep.passed = true;
  for (double delta : delta_grid) {
    if (!(delta > 0.0 && delta <= 0.1)) raise(ErrorCode::kDomain, "Theta width must lie in (0, 0.1]");
    ThetaBump a{center, delta};
    // P1 on a grid over the band of the flow space below the bump.
    const double bound = std::exp(-std::pow(delta, -0.1));
    const double radius = std::pow(delta, 0.9);
    double p1_excess = -bound;
    const int nt = 400, nu = 200;
    const double u_top = std::min(flow.roof.inf_value, center.u + 1.0);
    for (int i = 0; i < nt; ++i) {
      CirclePoint th = center.theta + CirclePoint::from_double((i + 0.5) / nt);
      for (int k = 0; k < nu; ++k) {
        FlowPoint x{th, u_top * (k + 0.5) / nu};
        if (product_distance(x, center) <= radius) continue;
        p1_excess = std::max(p1_excess, a(x) - bound);
      }
    }
    for (double d : d_grid) {
      ThetaBump b{{center.theta + CirclePoint::from_double(d), center.u}, delta};
      auto cross = [&](const ThetaBump& p, const ThetaBump& q) {
        const double reach = std::min(0.5, p.reach() + d);
        auto outer = [&](double s) {
          CirclePoint th = center.theta + CirclePoint::from_double(s);
          double f = flow.height(th);
          double lo = std::max(0.0, center.u - p.reach());
          double hi = std::min(f, center.u + p.reach());
          if (hi <= lo) return 0.0;
          auto inner = [&](double u) { return p({th, u}) * q({th, u}); };
          return integrate_adaptive(inner, lo, hi, 1e-15, 1e-12).value;
        };
        return integrate_adaptive(outer, -reach, reach, 1e-14, 1e-11).value;
      };
      ThetaPropertyRow row;
      row.delta = delta;
      row.d = d;
      row.p1_max_excess = p1_excess;
      row.p2_quadrature = cross(a, a);
      row.p2_expected = 0.5 * M_PI * delta * delta;
      row.p3_quadrature = cross(a, b);
      row.p3_expected = row.p2_expected * std::exp(-d * d / (2 * delta * delta));
      row.strict_gaussian = std::exp(-(0.1 / delta) * (0.1 / delta));
      row.passed = p1_excess <= 0.0 && std::fabs(row.p2_quadrature - row.p2_expected) <= tolerance &&
                   std::fabs(row.p3_quadrature - row.p3_expected) <= tolerance;
      rep.passed = rep.passed && row.passed;
      rep.rows.push_back(row);
    }
  }
  return rep;
}

namespace {

void check_skew(const SkewProduct& sp) {
  if (sp.base == nullptr || sp.cocycle == nullptr) raise(ErrorCode::kPrecondition, "skew product is incomplete");
  if (sp.component < 0 || sp.component >= sp.cocycle->components()) {
    raise(ErrorCode::kDomain, "driving component out of range");
  }
}

}  // namespace

SkewPoint skew_evolve(const SkewProduct& sp, SkewPoint p, double T) {
  check_skew(sp);
  if (T < 0) raise(ErrorCode::kDomain, "skew evolution needs T >= 0");
  OrbitalIntegral tau = orbital_integral_fast(*sp.base, *sp.cocycle, sp.component, p.x, T);
  SkewPoint out;
  out.x = evolve(*sp.base, p.x, T);
  out.y = fiber_evolve(sp.fiber, p.y, sp.gain * tau.value);
  return out;
}

std::vector<double> skew_orbit_integrals(const SkewProduct& sp, const AppendixObservable& H, SkewPoint p,
                                         const std::vector<double>& T_grid) {
  check_skew(sp);
  std::vector<double> out(T_grid.size(), 0.0);
  if (T_grid.empty()) return out;
  for (std::size_t k = 1; k < T_grid.size(); ++k) {
    if (T_grid[k] < T_grid[k - 1]) raise(ErrorCode::kDomain, "horizons must be increasing");
  }
  if (T_grid.front() < 0) raise(ErrorCode::kDomain, "horizons must be non-negative");
  if (H.weight == 0.0) return out;

  const KocherginFlow& flow = *sp.base;
  const Cocycle& tau = *sp.cocycle;
  const int j = sp.component;
  const ThetaBump& bump = H.theta;
  const double reach = bump.reach();
  const double lo_u = bump.center.u - reach, hi_u = bump.center.u + reach;
  FiberPoint y = p.y;
  CompensatedSum total;
  std::size_t next = 0;
  while (next < T_grid.size() && T_grid[next] == 0.0) ++next;

  // Integral of H over [ua, ub] of the fiber above theta, with the fiber at
  // state y0 when the base sits at height ua.
  auto piece = [&](CirclePoint theta, double f, double ua, double ub, FiberPoint y0) {
    if (circle_distance(theta, bump.center.theta) >= reach) return 0.0;
    double wa = std::max(ua, lo_u), wb = std::min(ub, hi_u);
    if (wb <= wa) return 0.0;
    const double Fa = tau.fiber_integral(j, theta, f, ua);
    const double zl = tau.zero_level(j, theta, f);
    double sum = 0.0;
    if (wa < zl) {
      double top = std::min(wb, zl);
      FiberPoint yw = fiber_evolve(sp.fiber, y0, sp.gain * (tau.fiber_integral(j, theta, f, wa) - Fa));
      sum += bump.fiber_mass(theta, wa, top) * fiber_observable(yw);
      wa = top;
    }
    if (wa < wb) {
      auto g = [&](double u) {
        FiberPoint yu = fiber_evolve(sp.fiber, y0, sp.gain * (tau.fiber_integral(j, theta, f, u) - Fa));
        return bump({theta, u}) * fiber_observable(yu);
      };
      std::vector<double> cuts{wa};
      for (double b : tau.breakpoints(j, theta, f)) {
        if (b > wa && b < wb) cuts.push_back(b);
      }
      cuts.push_back(wb);
      std::sort(cuts.begin(), cuts.end());
      for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        sum += integrate_adaptive(g, cuts[i], cuts[i + 1], 1e-13, 1e-9).value;
      }
    }
    return sum;
  };

  for_each_segment(flow, p.x, T_grid.back(), [&](CirclePoint theta, double from, double to, double t0) {
    const double f = flow.height(theta);
    while (next < T_grid.size() && T_grid[next] <= t0 + (to - from)) {
      double u = std::min(to, from + (T_grid[next] - t0));
      out[next] = H.weight * (total.value() + piece(theta, f, from, u, y));
      ++next;
    }
    total += piece(theta, f, from, to, y);
    double dtau = tau.fiber_integral(j, theta, f, to) - tau.fiber_integral(j, theta, f, from);
    y = fiber_evolve(sp.fiber, y, sp.gain * dtau);
  });
  for (; next < T_grid.size(); ++next) out[next] = H.weight * total.value();
  return out;
}

std::vector<CltResult> clt_monte_carlo(const SkewProduct& sp, const AppendixObservable& H,
                                       const std::vector<double>& T_grid, std::size_t samples,
                                       std::uint64_t seed, const ParallelOptions& options) {
  check_skew(sp);
  if (samples < 2) raise(ErrorCode::kPrecondition, "CLT test needs at least two samples");
  for (double T : T_grid) {
    if (!(T > 0)) raise(ErrorCode::kDomain, "CLT horizons must be positive");
  }
  std::vector<std::vector<double>> integrals(samples);
  parallel_chunks(samples, options, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(seed, kCltStream, chunk));
    for (std::size_t i = b; i < e; ++i) {
      SkewPoint p{sample_invariant_one(*sp.base, rng), sample_fiber(sp.fiber, rng)};
      integrals[i] = skew_orbit_integrals(sp, H, p, T_grid);
    }
  });
  std::vector<CltResult> out;
  const double n = static_cast<double>(samples);
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    CltResult r;
    r.T = T_grid[k];
    r.samples = samples;
    const double root = std::sqrt(r.T);
    double max_abs = 0.0;
    for (std::size_t i = 0; i < samples; ++i) {
      r.Z.push_back(integrals[i][k] / root);
      max_abs = std::max(max_abs, std::fabs(r.Z.back()));
    }
    Moments m = moments(r.Z);
    r.mean = m.mean;
    r.sigma2 = m.variance;
    r.skewness = m.skewness;
    r.excess_kurtosis = m.excess_kurtosis;
    r.skewness_se = std::sqrt(6.0 / n);
    r.kurtosis_se = std::sqrt(24.0 / n);
    double m4 = 0.0;
    for (double z : r.Z) m4 += std::pow(z - m.mean, 4);
    m4 /= n;
    double s4 = m.variance * m.variance;
    r.sigma2_se = std::sqrt(std::max(0.0, m4 - s4 * (n - 3) / (n - 1)) / n);
    const double floor = std::numeric_limits<double>::epsilon() * max_abs;
    r.degenerate = !(r.sigma2 > 10 * floor * floor) || r.sigma2 == 0.0;
    if (!r.degenerate) {
      KsResult ks = ks_test_normal(r.Z, 0.0, r.sigma2);
      r.ks_statistic = ks.statistic;
      if (samples >= 500) r.ks_p_value = ks.p_value;
    }
    out.push_back(std::move(r));
  }
  return out;
}

VarianceSeries variance_series(const SkewProduct& sp, const AppendixObservable& H, double t_max,
                               std::size_t samples, std::uint64_t seed, int bins, double tail_exponent,
                               const ParallelOptions& options) {
  check_skew(sp);
  if (!(t_max >= 0)) raise(ErrorCode::kDomain, "t_max must be non-negative");
  if (samples < 2) raise(ErrorCode::kPrecondition, "variance series needs at least two samples");
  if (bins < 1) raise(ErrorCode::kDomain, "variance series needs at least one bin");
  VarianceSeries vs;
  vs.t_max = t_max;
  vs.tail_exponent = tail_exponent;
  const int nb = t_max > 0 ? bins : 0;
  for (int b = 0; b <= nb; ++b) vs.t_edges.push_back(t_max * b / std::max(nb, 1));
  if (nb == 0) vs.t_edges = {0.0};

  const ThetaBump& bump = H.theta;
  const double W = bump.total_mass() / (sp.base->roof.count() * roof_integral(sp.base->roof.base, 0.0, 1.0));
  const double s = bump.delta / std::sqrt(2.0);
  // x is drawn with density Theta / total_mass (wrapped Gaussian in theta,
  // Gaussian cut at u = 0); per sample we keep Theta(x) D(y)^2 and D(y) times
  // the orbit integrals at the edges.
  std::vector<double> self(samples);
  std::vector<std::vector<double>> paths(samples);
  parallel_chunks(samples, options, [&](std::size_t chunk, std::size_t b, std::size_t e) {
    Rng rng(derive_seed(seed, kVarianceStream, chunk));
    for (std::size_t i = b; i < e; ++i) {
      FlowPoint x;
      for (;;) {
        x.theta = bump.center.theta + CirclePoint::from_double(s * rng.normal());
        x.u = bump.center.u + s * rng.normal();
        if (x.u >= 0 && x.u < sp.base->height(x.theta)) break;
      }
      FiberPoint y = sample_fiber(sp.fiber, rng);
      double d = fiber_observable(y);
      self[i] = bump(x) * d * d;
      if (nb > 0) {
        paths[i] = skew_orbit_integrals(sp, H, {x, y}, vs.t_edges);
        for (double& v : paths[i]) v *= d;
      }
    }
  });
  Moments c0 = moments(self);
  const double w2 = H.weight * H.weight;
  vs.c0 = w2 * W * c0.mean;
  vs.c0_se = w2 * W * std::sqrt(c0.variance / samples);
  if (nb > 0) {
    std::vector<double> last(samples);
    for (std::size_t i = 0; i < samples; ++i) last[i] = paths[i].back();
    Moments m = moments(last);
    vs.sigma2 = 2 * H.weight * W * m.mean;
    vs.sigma2_se = 2 * std::fabs(H.weight) * W * std::sqrt(m.variance / samples);
    for (int b = 0; b < nb; ++b) {
      double acc = 0.0;
      for (std::size_t i = 0; i < samples; ++i) acc += paths[i][b + 1] - paths[i][b];
      double width = vs.t_edges[b + 1] - vs.t_edges[b];
      vs.correlation.push_back(H.weight * W * acc / samples / width);
    }
  }
  if (tail_exponent < -1.0 && t_max > 0) {
    vs.tail_bound = 2 * std::fabs(vs.c0) * std::pow(t_max, tail_exponent + 1) / (-tail_exponent - 1);
  } else {
    vs.tail_bound = std::numeric_limits<double>::infinity();
  }
  return vs;
}

double fiber_correlation(const FiberFlow& fiber, double t, std::size_t samples, std::uint64_t seed) {
  CompensatedSum acc;
  Rng rng(derive_seed(seed, kFiberCorrStream, 0));
  for (std::size_t i = 0; i < samples; ++i) {
    FiberPoint q = sample_fiber(fiber, rng);
    acc += fiber_observable(q) * fiber_observable(fiber_evolve(fiber, q, t));
  }
  return acc.value() / static_cast<double>(samples);
}

}  // namespace kochlab
