#include "kochlab/cocycle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "kochlab/birkhoff.hpp"
#include "kochlab/error.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/stats.hpp"

namespace kochlab {

namespace {

double ln_pow(double T, int k) { return std::pow(std::log(T), k); }

// Roof value at c_j +- a, resolving the singular part at full precision.
double height_beside(const CompositeRoof& f, int j, double a, bool right) {
  double h = eval_roof_parts(f.base, a, 1.0 - a, 0);
  CirclePoint at = right ? f.singularities[j] + CirclePoint::from_double(a)
                         : f.singularities[j] - CirclePoint::from_double(a);
  for (int i = 0; i < f.count(); ++i) {
    if (i != j) h += eval_roof(f.base, at - f.singularities[i], 0);
  }
  return h;
}

}  // namespace

BumpCocycle::BumpCocycle(const KocherginFlow& flow, const BumpParameters& params)
    : params_(params), centers_(flow.roof.singularities), roof_(flow.roof) {
  const double kappa = params.kappa;
  if (!(kappa > 0)) raise(ErrorCode::kDomain, "kappa must be positive");
  if (centers_.empty()) raise(ErrorCode::kGeometry, "cocycle needs at least one singularity");
  for (std::size_t i = 0; i < centers_.size(); ++i) {
    for (std::size_t j = i + 1; j < centers_.size(); ++j) {
      if (!(circle_distance(centers_[i], centers_[j]) > 4 * kappa)) {
        raise(ErrorCode::kGeometry, "2 kappa-balls of singularities " + std::to_string(i) + " and " +
                                        std::to_string(j) + " overlap");
      }
    }
  }
  q_center_ = farthest_from_singularities(centers_);
  double clearance = nearest_singularity(roof_, q_center_).distance - 2 * kappa;
  if (!(clearance > 0)) raise(ErrorCode::kGeometry, "no correction region away from the 2 kappa-balls");
  if (params.margin < 2 * kappa || 2 * params.margin > roof_.inf_value) {
    raise(ErrorCode::kPrecondition, "fiber margin must satisfy 2 kappa <= m0 <= inf f / 2");
  }
  q_width_ = std::min(0.9 * clearance, 0.25);
  q_height_ = 0.5 * roof_.inf_value;
  q_band_ = 0.25 * roof_.inf_value;
  double q_mass = correction_mass();
  for (int j = 0; j < components(); ++j) scale_.push_back(plateau_mass(j) / q_mass);
}

double BumpCocycle::plateau_fiber_partial(double a, double height, double h) const {
  const double kappa = params_.kappa;
  if (a >= 2 * kappa || h <= 0) return 0.0;
  h = std::min(h, height);
  const double m0 = params_.margin;
  const double pa = plateau(a / kappa);
  auto Psi = [&](double v) {
    if (v <= a) return v * pa;
    return a * pa + kappa * (plateau_integral(v / kappa) - plateau_integral(a / kappa));
  };
  double total = Psi(m0) - Psi(m0 - std::min(h, m0));
  total += (std::clamp(h, m0, height - m0) - m0) * pa;
  if (h > height - m0) total += Psi(h - (height - m0));
  return total;
}

double BumpCocycle::correction_fiber_partial(CirclePoint theta, double h) const {
  double g = plateau(2 * circle_distance(theta, q_center_) / q_width_);
  if (g == 0.0) return 0.0;
  auto G = [&](double x) {
    double v = 0.5 * q_band_ * plateau_integral(2 * std::fabs(x) / q_band_);
    return x < 0 ? -v : v;
  };
  return g * (G(h - q_height_) - G(-q_height_));
}

double BumpCocycle::plateau_value(int j, CirclePoint theta, double u, double height) const {
  double a = circle_distance(theta, centers_[j]);
  if (a >= 2 * params_.kappa) return 0.0;
  double margin = std::max(0.0, params_.margin - std::min(u, height - u));
  return plateau(std::max(a, margin) / params_.kappa);
}

double BumpCocycle::value(int j, CirclePoint theta, double u, double height) const {
  double q = plateau(2 * circle_distance(theta, q_center_) / q_width_);
  if (q != 0.0) q *= plateau(2 * std::fabs(u - q_height_) / q_band_);
  return plateau_value(j, theta, u, height) - scale_[j] * q;
}

double BumpCocycle::fiber_integral(int j, CirclePoint theta, double height, double h) const {
  double a = circle_distance(theta, centers_[j]);
  return plateau_fiber_partial(a, height, h) - scale_[j] * correction_fiber_partial(theta, h);
}

bool BumpCocycle::vanishes_on_fiber(int j, CirclePoint theta) const {
  return circle_distance(theta, centers_[j]) >= 2 * params_.kappa &&
         circle_distance(theta, q_center_) >= q_width_;
}

std::vector<double> BumpCocycle::breakpoints(int j, CirclePoint theta, double height) const {
  const double k = params_.kappa, m0 = params_.margin;
  const double a = circle_distance(theta, centers_[j]);
  std::vector<double> pts{m0 - 2 * k, m0 - k,     m0 - a,   m0,
                          height - m0, height - m0 + a, height - m0 + k, height - m0 + 2 * k,
                          q_height_ - q_band_, q_height_ - 0.5 * q_band_, q_height_,
                          q_height_ + 0.5 * q_band_, q_height_ + q_band_};
  std::vector<double> out;
  for (double p : pts) {
    if (p > 0 && p < height) out.push_back(p);
  }
  std::sort(out.begin(), out.end());
  return out;
}

double BumpCocycle::zero_level(int j, CirclePoint theta, double height) const {
  double level = height;
  if (circle_distance(theta, centers_[j]) < 2 * params_.kappa) level = params_.margin - 2 * params_.kappa;
  if (circle_distance(theta, q_center_) < q_width_) level = std::min(level, q_height_ - q_band_);
  return std::max(0.0, level);
}

bool BumpCocycle::in_core(int j, CirclePoint theta, double u, double height) const {
  double margin = std::max(0.0, params_.margin - std::min(u, height - u));
  return circle_distance(theta, centers_[j]) <= params_.kappa && margin <= params_.kappa;
}

double BumpCocycle::plateau_mass(int j) const {
  const double kappa = params_.kappa;
  double total = 0.0;
  for (bool right : {false, true}) {
    auto phi = [&](double a) {
      double f = height_beside(roof_, j, a, right);
      return plateau_fiber_partial(a, f, f);
    };
    total += integrate_left_singular(phi, 0.0, kappa, 1e-14, 1e-13).value;
    total += integrate_adaptive(phi, kappa, 2 * kappa, 1e-14, 1e-13).value;
  }
  return total;
}

double BumpCocycle::correction_mass() const {
  return (q_width_ * plateau_integral(2.0)) * (q_band_ * plateau_integral(2.0));
}

AnalyticCocycle::AnalyticCocycle(const KocherginFlow& flow, int order_L, int degree)
    : order_L_(order_L), degree_(degree) {
  if (order_L < 0 || degree < 0) raise(ErrorCode::kDomain, "order and degree must be >= 0");
  const auto& cs = flow.roof.singularities;
  const int count = flow.roof.count();
  const int rows = (order_L + 1) * count + 1;
  const int cols = 2 * degree + 1;
  if (cols < rows) {
    raise(ErrorCode::kRankDeficient, "degree " + std::to_string(degree) + " gives " +
                                         std::to_string(cols) + " unknowns for " +
                                         std::to_string(rows) + " constraints");
  }
  // Cosine moments of one singular profile; the sine moments vanish by symmetry.
  std::vector<double> C(degree + 1, 0.0);
  C[0] = 1.0;
  for (int k = 1; k <= degree; ++k) {
    auto g = [&](double t) { return eval_roof_parts(flow.roof.base, t, 1.0 - t, 0) * std::cos(2 * M_PI * k * t); };
    C[k] = 2.0 * integrate_left_singular(g, 0.0, 0.5, 1e-15, 1e-14).value;
  }
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(rows, cols);
  Eigen::MatrixXd B = Eigen::MatrixXd::Zero(rows, count);
  int r = 0;
  for (int i = 0; i < count; ++i) {
    const double c = cs[i].value();
    for (int d = 0; d <= order_L; ++d, ++r) {
      M(r, 0) = d == 0 ? 1.0 : 0.0;
      for (int k = 1; k <= degree; ++k) {
        double w = std::pow(2 * M_PI * k, d);
        double phase = 2 * M_PI * k * c + d * M_PI / 2;
        M(r, k) = w * std::cos(phase);
        M(r, degree + k) = w * std::sin(phase);
      }
      if (d == 0) B(r, i) = 1.0;
    }
  }
  // Zero mean against f dtheta.
  M(r, 0) = count;
  for (int k = 1; k <= degree; ++k) {
    for (int i = 0; i < count; ++i) {
      M(r, k) += C[k] * std::cos(2 * M_PI * k * cs[i].value());
      M(r, degree + k) += C[k] * std::sin(2 * M_PI * k * cs[i].value());
    }
  }
  Eigen::VectorXd row_scale = M.rowwise().lpNorm<Eigen::Infinity>().cwiseInverse();
  Eigen::MatrixXd Ms = row_scale.asDiagonal() * M;
  Eigen::MatrixXd Bs = row_scale.asDiagonal() * B;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(Ms);
  cod.setThreshold(1e-12);
  if (cod.rank() < rows) {
    raise(ErrorCode::kRankDeficient, "interpolation system has rank " + std::to_string(cod.rank()) +
                                         " < " + std::to_string(rows));
  }
  Eigen::MatrixXd X = cod.solve(Bs);
  max_residual_ = (Ms * X - Bs).lpNorm<Eigen::Infinity>();
  for (int j = 0; j < count; ++j) {
    std::vector<double> cv(degree + 1, 0.0), sv(degree + 1, 0.0);
    cv[0] = X(0, j);
    for (int k = 1; k <= degree; ++k) {
      cv[k] = X(k, j);
      sv[k] = X(degree + k, j);
    }
    cos_.push_back(std::move(cv));
    sin_.push_back(std::move(sv));
  }
}

double AnalyticCocycle::derivative(int j, double theta, int d) const {
  double total = d == 0 ? cos_[j][0] : 0.0;
  for (int k = 1; k <= degree_; ++k) {
    double w = std::pow(2 * M_PI * k, d);
    double phase = 2 * M_PI * k * theta + d * M_PI / 2;
    total += w * (cos_[j][k] * std::cos(phase) + sin_[j][k] * std::sin(phase));
  }
  return total;
}

double AnalyticCocycle::value(int j, CirclePoint theta, double, double) const {
  return derivative(j, theta.value(), 0);
}

double AnalyticCocycle::fiber_integral(int j, CirclePoint theta, double, double h) const {
  return h * derivative(j, theta.value(), 0);
}

OrbitalIntegral orbital_integral_quadrature(const KocherginFlow& flow, const Cocycle& cocycle, int j,
                                            FlowPoint p, double T, double tol) {
  if (j < 0 || j >= cocycle.components()) raise(ErrorCode::kDomain, "component index out of range");
  OrbitalIntegral out;
  out.component = j;
  out.start = p;
  out.T = T;
  out.method = "quadrature";
  CompensatedSum value, error;
  std::int64_t segments = 0;
  for_each_segment(flow, p, T, [&](CirclePoint theta, double from, double to, double) {
    ++segments;
    out.end_theta = theta;
    if (to <= from || cocycle.vanishes_on_fiber(j, theta)) return;
    double f = flow.height(theta);
    auto g = [&](double u) { return cocycle.value(j, theta, u, f); };
    std::vector<double> cuts{from};
    for (double b : cocycle.breakpoints(j, theta, f)) {
      if (b > from && b < to) cuts.push_back(b);
    }
    cuts.push_back(to);
    for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
      QuadratureResult q = integrate_adaptive(g, cuts[k], cuts[k + 1], tol, 1e-12);
      value += q.value;
      error += q.error;
    }
  });
  out.value = value.value();
  out.error_estimate = error.value();
  out.N = static_cast<std::uint64_t>(segments - 1);
  return out;
}

namespace {

// Shared fiber walk: calls full(theta, f) for each completed fiber and
// returns, for each horizon, the last fiber and the residual height on it.
struct Stop {
  CirclePoint theta;
  double height = 0.0;
  double residual = 0.0;
  std::uint64_t N = 0;
};

template <class Full, class AtStop>
void walk_fibers(const KocherginFlow& flow, FlowPoint p, const std::vector<double>& T_grid, Full&& full,
                 AtStop&& at_stop) {
  CirclePoint theta = p.theta;
  CompensatedSum consumed;
  std::uint64_t N = 0;
  double f = flow.height(theta);
  double prev = 0.0;
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    double T = T_grid[k];
    if (!(T >= prev)) raise(ErrorCode::kDomain, "horizons must be non-negative and increasing");
    if (T > flow.horizon) raise(ErrorCode::kHorizon, "evolution time exceeds the configured horizon");
    prev = T;
    for (;;) {
      double residual = (p.u + T) - consumed.value();
      if (residual < f) break;
      full(theta, f);
      consumed += f;
      theta += flow.alpha();
      ++N;
      f = flow.height(theta);
    }
    at_stop(k, Stop{theta, f, std::max(0.0, (p.u + T) - consumed.value()), N});
  }
}

}  // namespace

OrbitalIntegral orbital_integral_fast(const KocherginFlow& flow, const Cocycle& cocycle, int j,
                                      FlowPoint p, double T) {
  if (j < 0 || j >= cocycle.components()) raise(ErrorCode::kDomain, "component index out of range");
  OrbitalIntegral out;
  out.component = j;
  out.start = p;
  out.T = T;
  out.method = "decomposition";
  const CirclePoint c = flow.roof.singularities.at(std::min(j, flow.roof.count() - 1));
  CompensatedSum fibers, ergodic;
  double f0 = flow.height(p.theta);
  out.start_fiber_term = cocycle.fiber_integral(j, p.theta, f0, p.u);
  walk_fibers(
      flow, p, {T},
      [&](CirclePoint theta, double f) {
        fibers += cocycle.full_fiber_integral(j, theta, f);
        ergodic += eval_roof(flow.roof.base, theta - c, 0) - 1.0;
      },
      [&](std::size_t, const Stop& s) {
        out.N = s.N;
        out.end_theta = s.theta;
        out.end_fiber_term = cocycle.fiber_integral(j, s.theta, s.height, s.residual);
      });
  fibers += -out.start_fiber_term;
  fibers += out.end_fiber_term;
  out.value = fibers.value();
  out.ergodic_part = ergodic.value();
  return out;
}

std::vector<std::vector<double>> orbital_integrals(const KocherginFlow& flow, const Cocycle& cocycle,
                                                   FlowPoint p, const std::vector<double>& T_grid) {
  const int d = cocycle.components();
  std::vector<CompensatedSum> acc(d);
  double f0 = flow.height(p.theta);
  for (int j = 0; j < d; ++j) acc[j] += -cocycle.fiber_integral(j, p.theta, f0, p.u);
  std::vector<std::vector<double>> out(T_grid.size(), std::vector<double>(d, 0.0));
  walk_fibers(
      flow, p, T_grid,
      [&](CirclePoint theta, double f) {
        for (int j = 0; j < d; ++j) {
          if (!cocycle.vanishes_on_fiber(j, theta)) acc[j] += cocycle.full_fiber_integral(j, theta, f);
        }
      },
      [&](std::size_t k, const Stop& s) {
        for (int j = 0; j < d; ++j) {
          out[k][j] = acc[j].value() + cocycle.fiber_integral(j, s.theta, s.height, s.residual);
        }
      });
  return out;
}

AgreementReport check_orbital_agreement(const KocherginFlow& flow, const BumpCocycle& cocycle,
                                        double T, std::size_t points, std::uint64_t seed,
                                        double frozen_C, const ParallelOptions& options) {
  AgreementReport rep;
  rep.frozen_C = frozen_C;
  std::vector<FlowPoint> starts = sample_invariant(flow, seed, points, options);
  const int d = cocycle.components();
  rep.rows.resize(points * d);
  parallel_chunks(points, {options.workers, 4}, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      for (int j = 0; j < d; ++j) {
        OrbitalIntegral q = orbital_integral_quadrature(flow, cocycle, j, starts[i], T);
        OrbitalIntegral fast = orbital_integral_fast(flow, cocycle, j, starts[i], T);
        AgreementRow& row = rep.rows[i * d + j];
        row.start = starts[i];
        row.component = j;
        row.quadrature = q.value;
        row.fast = fast.value;
        row.ergodic_part = fast.ergodic_part;
        const CirclePoint c = flow.roof.singularities[j];
        row.budget = std::fabs(eval_roof(flow.roof.base, starts[i].theta - c, 0)) +
                     std::fabs(eval_roof(flow.roof.base, fast.end_theta - c, 0)) + ln_pow(T, 4);
        row.ratio = std::fabs(q.value - fast.ergodic_part) / row.budget;
        double gap = std::fabs(q.value - fast.value);
        row.numerically_equal = gap <= 1e-7 * std::max(1.0, std::fabs(q.value)) + 10 * q.error_estimate;
      }
    }
  });
  rep.passed = true;
  for (const AgreementRow& row : rep.rows) {
    rep.fitted_C = std::max(rep.fitted_C, row.ratio);
    rep.max_numerical_gap = std::max(rep.max_numerical_gap, std::fabs(row.quadrature - row.fast));
    rep.passed = rep.passed && row.numerically_equal;
  }
  rep.passed = rep.passed && rep.fitted_C <= 10.0 && (frozen_C <= 0 || rep.fitted_C <= 2 * frozen_C);
  return rep;
}

Case1Report check_case1_lower_bound(const KocherginFlow& flow, const Cocycle& cocycle,
                                    double epsilon, double T, std::size_t points,
                                    std::uint64_t seed) {
  if (!(epsilon > 0 && epsilon < 0.5)) raise(ErrorCode::kDomain, "epsilon must lie in (0, 1/2)");
  Case1Report rep;
  rep.epsilon = epsilon;
  rep.T = T;
  rep.N_limit = std::pow(T, 1.0 - epsilon);
  const double gamma = flow.roof.base.gamma;
  const double reach = 1.0 / (epsilon * std::pow(T, 1.0 / gamma));
  const std::size_t max_attempts = 200 * std::max<std::size_t>(points, 1);
  Rng rng(derive_seed(seed, 0xca5e1, 0));
  const int count = flow.roof.count();
  while (rep.rows.size() < points && rep.attempts < max_attempts) {
    ++rep.attempts;
    int j = static_cast<int>(rng.bits() % count);
    // Close approach to c_j at an interior orbit index.
    std::int64_t index = 1 + static_cast<std::int64_t>(rng.bits() % 64);
    double offset = (2 * rng.uniform() - 1) * reach;
    if (std::fabs(offset) < 100 * kSingularityGuard) continue;
    CirclePoint theta = flow.roof.singularities[j] + CirclePoint::from_double(offset) - flow.alpha().times(index);
    FlowPoint p{theta, rng.uniform() * flow.height(theta)};
    ReturnCount rc = return_count(flow, p, T);
    if (static_cast<double>(rc.N) >= rep.N_limit || rc.N < static_cast<std::uint64_t>(index)) continue;
    std::vector<double> v = orbital_integrals(flow, cocycle, p, {T})[0];
    Case1Row row;
    row.start = p;
    row.seeded_component = j;
    row.N = rc.N;
    row.best_integral = *std::max_element(v.begin(), v.end());
    row.margin = row.best_integral - epsilon * epsilon * T;
    rep.rows.push_back(row);
  }
  if (rep.rows.empty()) {
    raise(ErrorCode::kConstructionFailure, "no constructed point reached N < T^(1-eps)");
  }
  rep.min_margin = rep.rows[0].margin;
  for (const Case1Row& r : rep.rows) rep.min_margin = std::min(rep.min_margin, r.margin);
  rep.passed = rep.rows.size() == points && rep.min_margin >= 0;
  return rep;
}

S2Report scan_S2_smallset(const KocherginFlow& flow, const Cocycle& cocycle, double C_const,
                          const std::vector<double>& T_grid, std::size_t samples,
                          std::uint64_t seed, const ParallelOptions& options) {
  S2Report rep;
  rep.constant_C = C_const;
  rep.samples = samples;
  std::vector<FlowPoint> starts = sample_invariant(flow, seed, samples, options);
  rep.norms.assign(T_grid.size(), std::vector<double>(samples, 0.0));
  parallel_chunks(samples, options, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto v = orbital_integrals(flow, cocycle, starts[i], T_grid);
      for (std::size_t k = 0; k < T_grid.size(); ++k) {
        double norm = 0.0;
        for (double x : v[k]) norm = std::max(norm, std::fabs(x));
        rep.norms[k][i] = norm;
      }
    }
  });
  std::vector<double> xs, ys;
  rep.strictly_decreasing = true;
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    S2Row row;
    row.T = T_grid[k];
    row.threshold = C_const * ln_pow(row.T, 2);
    for (double n : rep.norms[k]) row.small += n < row.threshold;
    row.fraction = static_cast<double>(row.small) / samples;
    row.fraction_se = std::sqrt(row.fraction * (1 - row.fraction) / samples);
    if (k > 0 && !(row.fraction < rep.rows.back().fraction)) rep.strictly_decreasing = false;
    xs.push_back(std::log(row.T));
    // Half-count continuity correction keeps empty bins finite in the fit.
    ys.push_back(std::log((row.small + 0.5) / (samples + 1.0)));
    rep.rows.push_back(row);
  }
  rep.exponent = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
  rep.passed = rep.strictly_decreasing && rep.exponent <= -1.0;
  return rep;
}

AnalyticDifferenceReport check_analytic_difference(const KocherginFlow& flow, const Cocycle& smooth,
                                                   const Cocycle& analytic,
                                                   const std::vector<double>& T_grid,
                                                   std::size_t samples, std::uint64_t seed,
                                                   double calibration,
                                                   const ParallelOptions& options) {
  if (smooth.components() != analytic.components()) {
    raise(ErrorCode::kPrecondition, "cocycles must have the same component count");
  }
  AnalyticDifferenceReport rep;
  rep.calibration = calibration;
  DifferenceCocycle diff(smooth, analytic);
  const double gamma = flow.roof.base.gamma;
  std::vector<FlowPoint> starts = sample_invariant(flow, seed, samples, options);
  std::vector<std::vector<double>> stat(T_grid.size(), std::vector<double>(samples, NAN));
  parallel_chunks(samples, options, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      auto v = orbital_integrals(flow, diff, starts[i], T_grid);
      for (std::size_t k = 0; k < T_grid.size(); ++k) {
        double radius = std::pow(T_grid[k], -20.0 / gamma);
        ReturnCount rc = return_count(flow, starts[i], T_grid[k]);
        CirclePoint theta = starts[i].theta;
        bool good = true;
        for (std::uint64_t n = 0; n <= rc.N && good; ++n, theta += flow.alpha()) {
          good = nearest_singularity(flow.roof, theta).distance >= radius;
        }
        if (!good) continue;
        double norm = 0.0;
        for (double x : v[k]) norm = std::max(norm, std::fabs(x));
        stat[k][i] = norm / ln_pow(T_grid[k], 5);
      }
    }
  });
  std::vector<double> xs, ys;
  for (std::size_t k = 0; k < T_grid.size(); ++k) {
    AnalyticDifferenceRow row;
    row.T = T_grid[k];
    row.exclusion_radius = std::pow(row.T, -20.0 / gamma);
    row.exclusion_mass_bound = 2 * row.exclusion_radius * flow.roof.count() * (row.T * flow.inv_inf_f() + 1);
    std::vector<double> kept;
    for (double s : stat[k]) {
      if (std::isnan(s)) ++row.excluded; else kept.push_back(s);
    }
    row.kept = kept.size();
    row.q99 = kept.empty() ? 0.0 : quantile(kept, 0.99);
    rep.max_q99 = std::max(rep.max_q99, row.q99);
    xs.push_back(std::log(row.T));
    ys.push_back(std::log(std::max(row.q99, 1e-300)));
    rep.rows.push_back(row);
  }
  rep.slope = xs.size() >= 2 ? fit_line(xs, ys).slope : 0.0;
  rep.passed = rep.slope <= 0.05 && (calibration <= 0 || rep.max_q99 <= 2 * calibration);
  return rep;
}

}  // namespace kochlab
