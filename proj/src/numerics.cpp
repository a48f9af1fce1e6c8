#include "kochlab/numerics.hpp"

#include <algorithm>
#include <array>
#include <mutex>

namespace kochlab {
namespace {

constexpr std::array<double, 8> kKronrodNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kKronrodWeights = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr std::array<double, 4> kGaussWeights = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a, b;
  int depth;
};

void gk15(const RealFn& f, double a, double b, double& kronrod, double& gauss) {
  double c = 0.5 * (a + b);
  double h = 0.5 * (b - a);
  double fc = f(c);
  kronrod = fc * kKronrodWeights[7];
  gauss = fc * kGaussWeights[3];
  for (int i = 0; i < 7; ++i) {
    double dx = h * kKronrodNodes[i];
    double s = f(c - dx) + f(c + dx);
    kronrod += kKronrodWeights[i] * s;
    if (i % 2 == 1) gauss += kGaussWeights[i / 2] * s;
  }
  kronrod *= h;
  gauss *= h;
}

}  // namespace

QuadratureResult integrate_adaptive(const RealFn& f, double a, double b, double abs_tol,
                                    double rel_tol, int max_depth) {
  QuadratureResult out;
  if (a == b) return out;
  CompensatedSum total;
  CompensatedSum err;
  std::vector<Panel> stack{{a, b, 0}};
  double width = b - a;
  // Rough global magnitude from the first panel sets the relative tolerance scale.
  double k0, g0;
  gk15(f, a, b, k0, g0);
  out.evaluations += 15;
  double scale = std::max(std::fabs(k0), abs_tol);
  while (!stack.empty()) {
    Panel p = stack.back();
    stack.pop_back();
    double k, g;
    gk15(f, p.a, p.b, k, g);
    out.evaluations += 15;
    double local_tol = std::max(abs_tol, rel_tol * scale) * (p.b - p.a) / width;
    double e = std::fabs(k - g);
    if (e <= local_tol || p.depth >= max_depth) {
      total += k;
      err += e;
      continue;
    }
    double m = 0.5 * (p.a + p.b);
    stack.push_back({m, p.b, p.depth + 1});
    stack.push_back({p.a, m, p.depth + 1});
  }
  out.value = total.value();
  out.error = err.value();
  return out;
}

QuadratureResult integrate_left_singular(const RealFn& f, double a, double b, double abs_tol,
                                         double rel_tol) {
  double len = b - a;
  auto g = [&](double t) {
    double t2 = t * t;
    double t3 = t2 * t;
    return f(a + len * t3 * t) * 4.0 * len * t3;
  };
  return integrate_adaptive(g, 0.0, 1.0, abs_tol, rel_tol);
}

GaussRule gauss_legendre(int n) {
  GaussRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      double dx = p1 / dp;
      x -= dx;
      if (std::fabs(dx) < 1e-16) break;
    }
    rule.nodes[i] = x;
    rule.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  std::reverse(rule.nodes.begin(), rule.nodes.end());
  std::reverse(rule.weights.begin(), rule.weights.end());
  return rule;
}

double smooth_step(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double e0 = std::exp(-1.0 / x);
  double e1 = std::exp(-1.0 / (1.0 - x));
  return e0 / (e0 + e1);
}

double plateau(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  return 1.0 - smooth_step(s - 1.0);
}

namespace {

// Cumulative integral of smooth_step on [0, 1], cubic Hermite between
// cell values obtained by 8-point Gauss-Legendre per cell.
class StepIntegralTable {
 public:
  static constexpr int kCells = 1024;

  StepIntegralTable() {
    GaussRule rule = gauss_legendre(8);
    values_[0] = 0.0;
    double h = 1.0 / kCells;
    CompensatedSum acc;
    for (int c = 0; c < kCells; ++c) {
      double a = c * h;
      double cell = 0.0;
      for (int i = 0; i < 8; ++i) {
        cell += rule.weights[i] * smooth_step(a + 0.5 * h * (rule.nodes[i] + 1.0));
      }
      acc += 0.5 * h * cell;
      values_[c + 1] = acc.value();
    }
  }

  double operator()(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return values_[kCells] + (x - 1.0);
    double h = 1.0 / kCells;
    int c = std::min(static_cast<int>(x * kCells), kCells - 1);
    double t = (x - c * h) / h;
    double y0 = values_[c], y1 = values_[c + 1];
    double m0 = smooth_step(c * h) * h, m1 = smooth_step((c + 1) * h) * h;
    double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y0 + (t3 - 2 * t2 + t) * m0 + (-2 * t3 + 3 * t2) * y1 +
           (t3 - t2) * m1;
  }

 private:
  std::array<double, kCells + 1> values_{};
};

const StepIntegralTable& step_table() {
  static const StepIntegralTable table;
  return table;
}

}  // namespace

double plateau_integral(double s) {
  if (s <= 0.0) return 0.0;
  if (s <= 1.0) return s;
  if (s >= 2.0) return 1.5;
  double x = s - 1.0;
  return 1.0 + x - step_table()(x);
}

}  // namespace kochlab
