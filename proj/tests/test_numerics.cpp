#include <doctest.h>

#include <cmath>
#include <random>

#include "kochlab/circle.hpp"
#include "kochlab/numerics.hpp"
#include "kochlab/random.hpp"
#include "kochlab/stats.hpp"

using namespace kochlab;

TEST_CASE("circle points wrap exactly") {
  CirclePoint a = CirclePoint::from_double(0.75);
  CirclePoint b = CirclePoint::from_double(0.5);
  CHECK((a + b).value() == doctest::Approx(0.25));
  CHECK((b - a).norm() == doctest::Approx(0.25));
  CHECK(CirclePoint::from_double(-0.1).value() == doctest::Approx(0.9));
  CirclePoint tiny = CirclePoint::from_raw(1);
  CHECK((-tiny).complement() == std::ldexp(1.0, -64));
  CHECK(a.times(4) == CirclePoint());
}

TEST_CASE("compensated sum recovers cancelled terms") {
  CompensatedSum s;
  s += 1.0;
  s += 1e100;
  s += 1.0;
  s += -1e100;
  CHECK(s.value() == 2.0);
}

TEST_CASE("adaptive quadrature on smooth and singular integrands") {
  auto r = integrate_adaptive([](double x) { return std::sin(x); }, 0.0, M_PI);
  CHECK(r.value == doctest::Approx(2.0).epsilon(1e-13));
  auto s = integrate_left_singular([](double x) { return std::pow(x, -1.0 / 3.0); }, 0.0, 1.0);
  CHECK(s.value == doctest::Approx(1.5).epsilon(1e-11));
}

TEST_CASE("Gauss-Legendre integrates polynomials of degree 2n-1 exactly") {
  GaussRule rule = gauss_legendre(6);
  double sum = 0.0, total = 0.0;
  for (int i = 0; i < 6; ++i) {
    sum += rule.weights[i] * std::pow(rule.nodes[i], 10);
    total += rule.weights[i];
  }
  CHECK(sum == doctest::Approx(2.0 / 11.0).epsilon(1e-14));
  CHECK(total == doctest::Approx(2.0).epsilon(1e-15));
}

TEST_CASE("plateau profile and its integral") {
  CHECK(plateau(0.5) == 1.0);
  CHECK(plateau(2.5) == 0.0);
  CHECK(plateau(1.5) == doctest::Approx(0.5));
  CHECK(smooth_step(0.3) + smooth_step(0.7) == doctest::Approx(1.0));
  CHECK(plateau_integral(3.0) == doctest::Approx(1.5).epsilon(1e-14));
  // Oracle: direct adaptive quadrature of the profile.
  for (double s : {0.4, 1.1, 1.37, 1.5, 1.9, 2.0}) {
    auto q = integrate_adaptive(plateau, 0.0, s, 1e-14, 1e-14);
    CHECK(plateau_integral(s) == doctest::Approx(q.value).epsilon(1e-11));
  }
}

TEST_CASE("chunked parallel loop is worker-count independent") {
  auto run = [](int workers) {
    std::vector<double> out(1000);
    parallel_chunks(out.size(), {workers, 64}, [&](std::size_t chunk, std::size_t b, std::size_t e) {
      Rng rng(derive_seed(7, 1, chunk));
      for (std::size_t i = b; i < e; ++i) out[i] = rng.uniform();
    });
    return out;
  };
  CHECK(run(1) == run(3));
}

TEST_CASE("Rng draws are in range and roughly standard") {
  Rng rng(11);
  std::vector<double> xs;
  for (int i = 0; i < 20000; ++i) xs.push_back(rng.normal());
  Moments m = moments(xs);
  CHECK(std::fabs(m.mean) < 0.03);
  CHECK(m.variance == doctest::Approx(1.0).epsilon(0.03));
  for (int i = 0; i < 1000; ++i) {
    double u = rng.uniform();
    CHECK((u >= 0.0 && u < 1.0));
  }
}

TEST_CASE("statistics helpers") {
  CHECK(quantile({3, 1, 2, 4}, 0.5) == doctest::Approx(2.5));
  LineFit fit = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(normal_quantile(normal_cdf(1.3)) == doctest::Approx(1.3).epsilon(1e-10));
  // Classical critical value: P(K > 1.3581) = 0.05.
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(0.5) == doctest::Approx(0.9639).epsilon(1e-3));
  // Both series branches agree at the switch point.
  CHECK(kolmogorov_survival(0.999999) == doctest::Approx(kolmogorov_survival(1.000001)).epsilon(1e-5));
}

TEST_CASE("KS test accepts normal data and rejects uniform data") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  std::vector<double> normal, flat;
  for (int i = 0; i < 2000; ++i) {
    normal.push_back(nd(gen));
    flat.push_back(std::uniform_real_distribution<double>(-1.7, 1.7)(gen));
  }
  CHECK(ks_test_normal(normal, 0.0, 1.0).p_value > 0.01);
  CHECK(ks_test_normal(flat, 0.0, 1.0).p_value < 1e-3);
}
