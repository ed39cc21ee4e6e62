#include <doctest.h>

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "rdiff/error.hpp"
#include "rdiff/observables.hpp"
#include "rdiff/quadrature.hpp"
#include "rdiff/random.hpp"

using namespace rdiff;

TEST_CASE("gaussian closed forms") {
  for (int dim = 1; dim <= 3; ++dim) {
    const Observable g = gaussian(dim, 1.7);
    std::vector<double> zero(static_cast<std::size_t>(dim), 0.0);
    CHECK(g.eval_x(zero) == Complex(1.0, 0.0));
    CHECK(g.analytic);
    CHECK(g.radially_decreasing);
  }
  const Observable g = gaussian(1, 1.0);
  const double x[1] = {1.5};
  CHECK(g.eval_x(x).real() == doctest::Approx(std::exp(-1.125)).epsilon(1e-15));
}

TEST_CASE("k-space density integrates to one") {
  const Observable g1 = gaussian(1, 0.8);
  auto f1 = [&](double k) {
    const double p[1] = {k};
    return g1.phi(p);
  };
  CHECK(quad::integrate(f1, -20.0, 20.0).value == doctest::Approx(1.0).epsilon(1e-12));
  const Observable g2 = gaussian(2, 1.3);
  auto f2 = [&](double a, double b) {
    const double p[2] = {a, b};
    return g2.phi(p);
  };
  CHECK(quad::integrate_2d(f2, -15, 15, -15, 15, 1e-10).value == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("Fourier consistency in one dimension") {
  for (double sigma : {0.5, 1.0, 2.0}) {
    const Observable g = gaussian(1, sigma);
    for (double x = -4.0; x <= 4.0; x += 0.25) {
      auto re = [&](double k) {
        const double p[1] = {k};
        return std::cos(x * k) * g.phi(p);
      };
      auto im = [&](double k) {
        const double p[1] = {k};
        return std::sin(x * k) * g.phi(p);
      };
      const double R = 40.0 * sigma;
      const double xs[1] = {x};
      const Complex alpha = g.eval_x(xs);
      CHECK(std::abs(quad::integrate(re, -R, R).value - alpha.real()) <= 1e-8);
      CHECK(std::abs(quad::integrate(im, -R, R).value - alpha.imag()) <= 1e-8);
    }
  }
  const Observable m = modulated_gaussian(1, 0.7, {2.5});
  for (double x = -3.0; x <= 3.0; x += 0.5) {
    auto re = [&](double k) {
      const double p[1] = {k};
      return std::cos(x * k) * m.phi(p);
    };
    auto im = [&](double k) {
      const double p[1] = {k};
      return std::sin(x * k) * m.phi(p);
    };
    const double xs[1] = {x};
    const Complex alpha = m.eval_x(xs);
    CHECK(std::abs(quad::integrate(re, -30, 35).value - alpha.real()) <= 1e-8);
    CHECK(std::abs(quad::integrate(im, -30, 35).value - alpha.imag()) <= 1e-8);
  }
}

TEST_CASE("scale covariance alpha_sigma(x) = alpha_1(sigma x)") {
  const Observable g1 = gaussian(2, 1.0);
  for (double sigma : {0.3, 1.0, 2.5}) {
    const Observable gs = gaussian(2, sigma);
    for (double t = -3.0; t <= 3.0; t += 0.37) {
      const double x[2] = {t, 0.5 * t + 0.1};
      const double sx[2] = {sigma * x[0], sigma * x[1]};
      CHECK(gs.eval_x(x) == g1.eval_x(sx));
    }
  }
}

TEST_CASE("analytic derivative norms") {
  const Observable g = gaussian(1, 1.0);
  for (double t : {-2.0, -0.3, 0.0, 1.0, 2.7}) {
    const double x[1] = {t};
    CHECK(g.deriv_norm(x, 0) == doctest::Approx(std::abs(g.eval_x(x))).epsilon(1e-15));
    CHECK(g.deriv_norm(x, 1) == doctest::Approx(std::abs(t) * std::exp(-t * t / 2)).epsilon(1e-14));
  }
  double best = 0.0, arg = 0.0;
  for (double t = 0.0; t <= 3.0; t += 1e-4) {
    const double x[1] = {t};
    if (g.deriv_norm(x, 1) > best) {
      best = g.deriv_norm(x, 1);
      arg = t;
    }
  }
  CHECK(best == doctest::Approx(std::exp(-0.5)).epsilon(1e-8));
  CHECK(arg == doctest::Approx(1.0).epsilon(1e-3));
}

TEST_CASE("numeric derivative norm examples") {
  const Observable g1 = gaussian(1, 1.0);
  const double x0[1] = {0.0};
  const double x1[1] = {0.8};
  CHECK(numeric_derivative_norm(g1, x1, 0, 1e-3) == std::abs(g1.eval_x(x1)));
  CHECK(numeric_derivative_norm(g1, x0, 1, 1e-3) <= 1e-6);
  const Observable g2 = gaussian(2, 1.0);
  const double p[2] = {1.0, 0.0};
  CHECK(std::abs(numeric_derivative_norm(g2, p, 1, 1e-3) - std::exp(-0.5)) <= 1e-6);
}

TEST_CASE("analytic and finite-difference norms agree on 100 probes") {
  SplitMix64 rng(2024);
  int probes = 0;
  double worst = 0.0;
  for (int dim = 1; dim <= 2; ++dim) {
    for (double sigma : {0.7, 1.0, 1.6}) {
      const Observable g = gaussian(dim, sigma);
      for (int i = 0; i < 17; ++i) {
        std::vector<double> x(static_cast<std::size_t>(dim));
        for (auto& c : x) c = (2.0 * rng.uniform() - 1.0) * 3.0 / sigma;
        const int order = static_cast<int>(rng.next() % static_cast<std::uint64_t>(dim + 2));
        const double exact = g.deriv_norm(x, order);
        const double fd = numeric_derivative_norm(g, x, order, 1e-2);
        worst = std::max(worst, std::abs(exact - fd) / std::max(1.0, exact));
        ++probes;
      }
    }
  }
  CHECK(probes >= 100);
  CHECK(worst <= 1e-5);
}

TEST_CASE("symmetry invariants") {
  CHECK(symmetry_violation(gaussian(2, 1.2), 200, 4.0, true) <= 1e-15);
  CHECK(symmetry_violation(modulated_gaussian(1, 0.9, {3.0}), 200, 4.0, true) <= 1e-15);
}

TEST_CASE("intensity examples") {
  const PointSet one(1, {0.0}, 1.0, "one");
  Sample s1;
  s1.kind = Model::A;
  s1.indices = {0};
  s1.amplitudes = {1.0};
  const double k[1] = {0.37};
  CHECK(intensity(one, s1, k) == doctest::Approx(1.0));

  const PointSet two(1, {0.0, 2.0}, 1.0, "two");
  Sample s2 = s1;
  s2.indices = {0, 0};
  s2.amplitudes = {1.0, 1.0};
  const double kpi[1] = {std::numbers::pi / 2.0};
  CHECK(intensity(two, s2, kpi) <= 1e-28);

  const PointSet lat = lattice(1, 1.0, 5.0);
  Sample s3 = s1;
  s3.indices.assign(lat.size(), 0);
  s3.amplitudes.assign(lat.size(), 1.0);
  const double k0[1] = {0.0};
  CHECK(intensity(lat, s3, k0) == doctest::Approx(121.0));
}

TEST_CASE("observable config parsing") {
  const Observable g = observable_from_json(nlohmann::json::parse(R"({"type":"gaussian","sigma":2})"), 2);
  CHECK(g.dim == 2);
  CHECK_THROWS_AS(observable_from_json(nlohmann::json::parse(R"({"type":"gaussian","sigma":2,"x":1})"), 1), Error);
  CHECK_THROWS_AS(observable_from_json(nlohmann::json::parse(R"({"type":"box","sigma":2})"), 1), Error);
  CHECK_THROWS_AS(observable_from_json(nlohmann::json::parse(R"({"type":"gaussian","sigma":-1})"), 1), Error);
}
