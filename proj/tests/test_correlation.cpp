#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "rdiff/correlation.hpp"
#include "rdiff/error.hpp"
#include "rdiff/norms.hpp"
#include "rdiff/observables.hpp"
#include "rdiff/pointset.hpp"
#include "rdiff/random.hpp"
#include "rdiff/scatterers.hpp"

using namespace rdiff;

namespace {

PointSet line(std::vector<double> xs, double min_dist) { return PointSet(1, std::move(xs), min_dist, "line"); }

double alpha1(const Observable& obs, double x) {
  const double p[1] = {x};
  return obs.eval_x(p).real();
}

AmplitudeSpec constant_amplitudes(Complex c) {
  AmplitudeSpec s;
  s.default_law = AmplitudeLaw{{c}, {1.0}};
  return s;
}

DislocationSpec zero_dislocations(int dim) {
  DislocationSpec s;
  s.dim = dim;
  s.default_law = DislocationLaw{{std::vector<double>(static_cast<std::size_t>(dim), 0.0)}, {1.0}};
  return s;
}

struct MeanEstimate {
  Complex mean;
  double stderr_re;
  double stderr_im;
};

MeanEstimate mc_mean(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, int n, std::uint64_t seed,
                     bool centered) {
  std::vector<double> re, im;
  for (int k = 0; k < n; ++k) {
    const Sample s = sample(spec, ps, derive_seed(seed, static_cast<std::uint64_t>(k)));
    const Complex v = centered ? centered_value(ps, spec, s, obs) : autocorr(ps, s, obs);
    re.push_back(v.real());
    im.push_back(v.imag());
  }
  auto stats = [n](const std::vector<double>& v, double& mean) {
    mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / (n - 1) / n);
  };
  double mr = 0.0, mi = 0.0;
  const double sr = stats(re, mr);
  const double si = stats(im, mi);
  return {{mr, mi}, sr, si};
}

}  // namespace

TEST_CASE("model A small examples") {
  const Observable g = gaussian(1, 1.0);
  {
    const PointSet one = line({0.0}, 1.0);
    const Complex c(2.0, -1.0);
    const Sample s = sample(constant_amplitudes(c), one, 1);
    CHECK(std::abs(autocorr_A(one, s, g) - std::norm(c) * 1.0) < 1e-15);
  }
  const double p = 1.4;
  const PointSet two = line({0.0, p}, p);
  const Sample s = sample(constant_amplitudes(1.0), two, 1);
  const double expect = 0.5 * (2.0 + 2.0 * alpha1(g, p));
  CHECK(autocorr_A(two, s, g).real() == doctest::Approx(expect).epsilon(1e-15));
  CHECK(autocorr_A(two, s, g).imag() == 0.0);
}

TEST_CASE("model B small examples") {
  const Observable g = gaussian(1, 0.8);
  const PointSet ps = line({0.0, 1.0, 2.5}, 1.0);
  // Zero dislocations reduce to model A with unit amplitudes.
  const Sample b = sample(zero_dislocations(1), ps, 3);
  const Sample a = sample(constant_amplitudes(1.0), ps, 3);
  CHECK(std::abs(autocorr_B(ps, b, g) - autocorr_A(ps, a, g)) < 1e-15);

  const PointSet one = line({0.0}, 1.0);
  const DislocationSpec sym = symmetric_dislocations(1, 0.1);
  for (std::uint64_t seed = 0; seed < 4; ++seed) CHECK(autocorr_B(one, sample(sym, one, seed), g) == Complex(1.0, 0.0));

  // Two sites with omega in {+d, -d}: the four configurations.
  const double p = 1.0, d = 0.1;
  const PointSet two = line({0.0, p}, p);
  for (std::uint32_t i : {0u, 1u}) {
    for (std::uint32_t j : {0u, 1u}) {
      const Sample s = sample_from_indices(sym, two, {i, j});
      const double wi = s.dislocations[0], wj = s.dislocations[1];
      CHECK(std::abs(wi) == d);
      CHECK(std::abs(wj) == d);
      const double expect = 0.5 * (2.0 + alpha1(g, -p + wi - wj) + alpha1(g, p - wi + wj));
      CHECK(autocorr_B(two, s, g).real() == doctest::Approx(expect).epsilon(1e-15));
    }
  }
}

TEST_CASE("pair sum equals the intensity integral") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = hardcore_random(1, 1.0, 20.0, 5);
  const AmplitudeSpec spec = bernoulli_amplitudes(1.0, -0.5, 0.3);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample s = sample(spec, ps, seed);
    const Complex pair = autocorr_A(ps, s, g);
    CHECK(std::abs(pair.imag()) <= 1e-10);
    CHECK(pair.real() >= -1e-12);
    CHECK(std::abs(pair.real() - intensity_integral_1d(ps, s, g)) <= 1e-6);
  }
}

TEST_CASE("exact means") {
  const Observable g = gaussian(1, 0.7);
  const PointSet ps = lattice(1, 1.0, 5.0);
  SUBCASE("deterministic amplitudes") {
    const AmplitudeSpec spec = constant_amplitudes(1.0);
    const Complex m = exact_mean_A(ps, spec, g);
    CHECK(std::abs(m - autocorr_A(ps, sample(spec, ps, 0), g)) < 1e-14);
  }
  SUBCASE("centered Bernoulli leaves the diagonal") {
    CHECK(std::abs(exact_mean_A(ps, bernoulli_amplitudes(), g) - 1.0) < 1e-15);
  }
  SUBCASE("zero dislocations") {
    const DislocationSpec spec = zero_dislocations(1);
    CHECK(std::abs(exact_mean_B(ps, spec, g) - autocorr_B(ps, sample(spec, ps, 0), g)) < 1e-14);
  }
  SUBCASE("pair table mean agrees") {
    const ScattererSpec a = bernoulli_amplitudes(2.0, -1.0, 0.25);
    const ScattererSpec b = symmetric_dislocations(1, 0.125);
    for (const auto& spec : {a, b}) {
      const PairTable t(ps, spec, g);
      CHECK(std::abs(t.mean() / static_cast<double>(ps.size()) - exact_mean(ps, spec, g)) < 1e-13);
    }
  }
}

TEST_CASE("exact mean matches Monte Carlo") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = lattice(1, 1.0, 15.5);  // 31 sites
  const ScattererSpec specs[] = {bernoulli_amplitudes(1.0, -0.5, 0.3), symmetric_dislocations(1, 0.2)};
  for (const auto& spec : specs) {
    const Complex exact = exact_mean(ps, spec, g);
    const MeanEstimate e = mc_mean(ps, spec, g, 20000, 77, false);
    CHECK(std::abs(e.mean.real() - exact.real()) <= 4 * e.stderr_re);
    CHECK(std::abs(e.mean.imag() - exact.imag()) <= 4 * e.stderr_im + 1e-15);
    const MeanEstimate c = mc_mean(ps, spec, g, 20000, 78, true);
    CHECK(std::abs(c.mean.real()) <= 4 * c.stderr_re);
  }
}

TEST_CASE("Debye-Waller route") {
  const PointSet ps = lattice(1, 1.0, 8.0);
  const DislocationSpec spec = symmetric_dislocations(1, 0.125);
  for (double k0 : {0.0, 0.7, 2.0, 3.1}) {
    const Observable m = modulated_gaussian(1, 0.5, {k0});
    const Complex x_route = exact_mean_B(ps, spec, m);
    CHECK(std::abs(x_route.imag()) <= 1e-12);
    CHECK(debye_waller_mean_1d(ps, spec, m) == doctest::Approx(x_route.real()).epsilon(1e-8));
  }
}

TEST_CASE("centered value") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = line({0.0, 1.0}, 1.0);
  const AmplitudeSpec det = constant_amplitudes(Complex(0.5, 0.5));
  CHECK(centered_value(ps, det, sample(det, ps, 9), g) == Complex(0.0, 0.0));

  // Two-site Bernoulli: the four configurations by hand.
  const AmplitudeSpec b = bernoulli_amplitudes();
  const double e = alpha1(g, 1.0);
  const double mean = 2.0;  // n * (alpha(0)) for centered +-1
  double second = 0.0;
  for (std::uint32_t i : {0u, 1u}) {
    for (std::uint32_t j : {0u, 1u}) {
      const Sample s = sample_from_indices(b, ps, {i, j});
      const double eta0 = s.amplitudes[0].real(), eta1 = s.amplitudes[1].real();
      const double expect = (2.0 + 2.0 * eta0 * eta1 * e) - mean;
      CHECK(centered_value(ps, b, s, g).real() == doctest::Approx(expect).epsilon(1e-14));
      second += 0.25 * expect * expect;
    }
  }
  CHECK(exact_variance(ps, b, g).variance == doctest::Approx(second).epsilon(1e-14));
}

TEST_CASE("variance paths agree") {
  const Observable g = gaussian(1, 0.9);
  const PointSet ps3 = line({0.0, 1.0, 2.7}, 1.0);
  const ScattererSpec specs[] = {bernoulli_amplitudes(), bernoulli_amplitudes(1.0, -0.3, 0.8),
                                 symmetric_dislocations(1, 0.1)};
  for (const auto& spec : specs) {
    const PairTable t(ps3, spec, g);
    CHECK(t.variance_hoeffding() == doctest::Approx(t.variance_enumeration()).epsilon(1e-12));
    const CenteredStats s = exact_variance(ps3, spec, g);
    CHECK(s.cross_checked);
  }
  // Mixed per-site laws with three-point supports in 2-D.
  const PointSet ps2 = hardcore_random(2, 1.0, 1.6, 4);
  REQUIRE(ps2.size() >= 3);
  REQUIRE(ps2.size() <= 10);
  AmplitudeSpec mixed = bernoulli_amplitudes();
  mixed.overrides[1] = AmplitudeLaw{{Complex(1, 1), Complex(0, -1), Complex(2, 0)}, {0.2, 0.5, 0.3}};
  DislocationSpec disp;
  disp.dim = 2;
  disp.default_law = DislocationLaw{{{0.1, 0.0}, {-0.05, 0.05}, {0.0, -0.1}}, {0.3, 0.3, 0.4}};
  const Observable g2 = gaussian(2, 1.1);
  for (const ScattererSpec& spec : {ScattererSpec(mixed), ScattererSpec(disp)}) {
    const PairTable t(ps2, spec, g2);
    CHECK(t.variance_hoeffding() == doctest::Approx(t.variance_enumeration()).epsilon(1e-12));
  }
  const PointSet deterministic = lattice(1, 1.0, 3.0);
  CHECK(exact_variance(deterministic, constant_amplitudes(2.0), g).variance == 0.0);
}

TEST_CASE("second moment matches Monte Carlo") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = lattice(1, 1.0, 10.0);
  const ScattererSpec spec = bernoulli_amplitudes(1.0, -1.0, 0.4);
  const double exact = exact_variance(ps, spec, g).variance;
  std::vector<double> sq;
  const int n = 20000;
  for (int k = 0; k < n; ++k) {
    const Sample s = sample(spec, ps, derive_seed(5, static_cast<std::uint64_t>(k)));
    sq.push_back(std::norm(centered_value(ps, spec, s, g)));
  }
  const double mean = std::accumulate(sq.begin(), sq.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : sq) ss += (v - mean) * (v - mean);
  CHECK(std::abs(mean - exact) <= 4 * std::sqrt(ss / (n - 1) / n));
}

TEST_CASE("normalized variance stays below four") {
  const PointSet sets[] = {lattice(1, 1.0, 6.0), fibonacci_chain(20, 1.0), hardcore_random(2, 1.0, 2.5, 8)};
  for (const auto& ps : sets) {
    for (double sigma : {0.25, 1.0, 3.0}) {
      const Observable g = gaussian(ps.dim(), sigma);
      const ScattererSpec specs[] = {bernoulli_amplitudes(), bernoulli_amplitudes(1.0, 0.0, 0.5),
                                     bernoulli_amplitudes(2.0, -1.0, 0.9),
                                     symmetric_dislocations(ps.dim(), ps.min_dist() / 8)};
      for (const auto& spec : specs) {
        const CenteredStats s = exact_variance(ps, spec, g);
        CAPTURE(ps.label());
        CAPTURE(sigma);
        CHECK(s.normalized >= 0.0);
        CHECK(s.normalized <= 4.0);
      }
    }
  }
}

TEST_CASE("permutation invariance") {
  const Observable g = gaussian(2, 0.8);
  const PointSet ps = hardcore_random(2, 1.0, 3.0, 12);
  const std::size_t n = ps.size();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::reverse(perm.begin(), perm.end());
  std::rotate(perm.begin(), perm.begin() + static_cast<long>(n / 3), perm.end());
  std::vector<double> coords;
  for (std::size_t i : perm) coords.insert(coords.end(), ps.point(i).begin(), ps.point(i).end());
  const PointSet permuted(2, coords, ps.min_dist(), "permuted");

  const ScattererSpec specs[] = {bernoulli_amplitudes(1.0, -0.4, 0.6), symmetric_dislocations(2, 0.1)};
  for (const auto& spec : specs) {
    const Sample s = sample(spec, ps, 31);
    std::vector<std::uint32_t> idx;
    for (std::size_t i : perm) idx.push_back(s.indices[i]);
    const Sample t = sample_from_indices(spec, permuted, idx);
    CHECK(std::abs(autocorr(ps, s, g) - autocorr(permuted, t, g)) <= 1e-13);
  }
}

TEST_CASE("model B centered value ignores constant shifts") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = lattice(1, 1.0, 4.0);
  const DislocationSpec spec = symmetric_dislocations(1, 0.125);
  for (double c : {-2.0, 0.5, 10.0}) {
    const Observable h = shifted(g, c);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const Sample s = sample(spec, ps, seed);
      CHECK(std::abs(centered_value(ps, spec, s, h) - centered_value(ps, spec, s, g)) <= 1e-12 * (1 + std::abs(c)));
    }
  }
}

TEST_CASE("normalization scales") {
  const Observable g = gaussian(1, 1.0);
  const PointSet ps = lattice(1, 1.0, 4.0);
  const AmplitudeSpec a = bernoulli_amplitudes(2.0, -1.0, 0.5);
  CHECK(normalization_scale(ps, a, g) == doctest::Approx(bounds_of(a).K * gamma_norm(g, ps).value));
  const DislocationSpec b = symmetric_dislocations(1, 0.1);
  CHECK(normalization_scale(ps, b, g) == doctest::Approx(gamma_delta_seminorm(g, ps, 0.1).value));
}
