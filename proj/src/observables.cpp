#include "rdiff/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rdiff/error.hpp"
#include "rdiff/quadrature.hpp"
#include "rdiff/random.hpp"

namespace rdiff {

namespace {

double norm2(std::span<const double> x) {
  double s = 0.0;
  for (double c : x) s += c * c;
  return s;
}

double gaussian_tail(double sigma, double tol) {
  return (std::sqrt(2.0 * std::log(1.0 / std::clamp(tol, 1e-300, 0.5))) + 4.0) / sigma;
}

// Non-negative zeros of He_n, all of which lie below 2 sqrt(n) + 2.
std::vector<double> compute_hermite_zeros(int n) {
  std::vector<double> zeros;
  if (n <= 0) return zeros;
  if (n % 2 == 1) zeros.push_back(0.0);
  const double upper = 2.0 * std::sqrt(static_cast<double>(n)) + 2.0;
  const int steps = 4000;
  double prev_x = 1e-9;
  double prev = hermite_he(n, prev_x);
  for (int s = 1; s <= steps; ++s) {
    const double x = upper * s / steps;
    const double v = hermite_he(n, x);
    if ((prev < 0.0 && v > 0.0) || (prev > 0.0 && v < 0.0)) {
      double lo = prev_x, hi = x, flo = prev;
      for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = hermite_he(n, mid);
        if ((fm < 0.0) == (flo < 0.0)) {
          lo = mid;
          flo = fm;
        } else {
          hi = mid;
        }
      }
      zeros.push_back(0.5 * (lo + hi));
    }
    prev_x = x;
    prev = v;
  }
  return zeros;
}

constexpr int kMaxCachedHermite = 24;

const std::vector<double>& hermite_zeros(int n) {
  static const auto table = [] {
    std::vector<std::vector<double>> t;
    for (int k = 0; k < kMaxCachedHermite; ++k) t.push_back(compute_hermite_zeros(k));
    return t;
  }();
  require(n >= 0 && n < kMaxCachedHermite, "Hermite order out of range");
  return table[static_cast<std::size_t>(n)];
}

// max |He_k(p)| over p in [0, upper]: endpoints plus critical points (zeros of He_{k-1}).
double max_abs_hermite(int k, double upper) {
  double best = std::max(std::abs(hermite_he(k, 0.0)), std::abs(hermite_he(k, upper)));
  for (double z : hermite_zeros(k - 1)) {
    if (z < upper) best = std::max(best, std::abs(hermite_he(k, z)));
  }
  return best;
}

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

std::vector<std::vector<double>> direction_grid(int dim) {
  std::vector<std::vector<double>> dirs;
  if (dim == 1) {
    dirs.push_back({1.0});
    return dirs;
  }
  for (int a = 0; a < dim; ++a) {
    for (double s : {1.0, -1.0}) {
      std::vector<double> e(static_cast<std::size_t>(dim), 0.0);
      e[static_cast<std::size_t>(a)] = s;
      dirs.push_back(e);
    }
  }
  const int extra = 64 * dim;
  if (dim == 2) {
    for (int j = 1; j <= extra; ++j) {
      const double t = 2.0 * std::numbers::pi * std::fmod(j * (std::numbers::phi - 1.0), 1.0);
      dirs.push_back({std::cos(t), std::sin(t)});
    }
    return dirs;
  }
  // R_d Kronecker sequence mapped from the cube to the sphere.
  double g = 2.0;
  for (int it = 0; it < 64; ++it) g = std::pow(1.0 + g, 1.0 / (dim + 1));
  for (int j = 1; j <= extra; ++j) {
    std::vector<double> e(static_cast<std::size_t>(dim));
    double n = 0.0;
    for (int a = 0; a < dim; ++a) {
      const double u = std::fmod(0.5 + j / std::pow(g, a + 1), 1.0);
      e[static_cast<std::size_t>(a)] = 2.0 * u - 1.0;
      n += e[static_cast<std::size_t>(a)] * e[static_cast<std::size_t>(a)];
    }
    n = std::sqrt(n);
    if (n < 1e-9) continue;
    for (auto& c : e) c /= n;
    dirs.push_back(e);
  }
  return dirs;
}

// Central difference of order k along e with Richardson extrapolation (error O(h^4)).
double directional_derivative(const Observable& obs, std::span<const double> x, std::span<const double> e, int k,
                              double h) {
  std::vector<double> p(x.size());
  auto raw = [&](double step) {
    Complex acc{0.0, 0.0};
    for (int j = 0; j <= k; ++j) {
      const double off = (0.5 * k - j) * step;
      for (std::size_t a = 0; a < x.size(); ++a) p[a] = x[a] + off * e[a];
      acc += ((j % 2) ? -1.0 : 1.0) * binomial(k, j) * obs.eval_x(p);
    }
    return acc / std::pow(step, k);
  };
  const Complex d1 = raw(h);
  const Complex d2 = raw(0.5 * h);
  return std::abs((4.0 * d2 - d1) / 3.0);
}

double direction_sup(const Observable& obs, std::span<const double> x, int k, double h,
                     const std::vector<std::vector<double>>& dirs) {
  double best = 0.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < dirs.size(); ++i) {
    const double v = directional_derivative(obs, x, dirs[i], k, h);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (x.size() == 2) {
    // Golden-section polish of the best angle.
    const double t0 = std::atan2(dirs[best_i][1], dirs[best_i][0]);
    const double width = 2.0 * std::numbers::pi / 64.0;
    auto f = [&](double t) {
      const double e[2] = {std::cos(t), std::sin(t)};
      return directional_derivative(obs, x, e, k, h);
    };
    double lo = t0 - width, hi = t0 + width;
    const double g = std::numbers::phi - 1.0;
    double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 80; ++it) {
      if (fc > fd) {
        hi = d;
        d = c;
        fd = fc;
        c = hi - g * (hi - lo);
        fc = f(c);
      } else {
        lo = c;
        c = d;
        fc = fd;
        d = lo + g * (hi - lo);
        fd = f(d);
      }
    }
    best = std::max({best, fc, fd});
  }
  return best;
}

}  // namespace

double Observable::phi(std::span<const double> k) const {
  if (!eval_k) fail(ErrorCode::InvalidArgument, "observable '" + label + "' has no k-space density");
  return eval_k(k);
}

double hermite_he(int n, double x) {
  if (n == 0) return 1.0;
  double prev = 1.0, cur = x;
  for (int m = 1; m < n; ++m) {
    const double next = x * cur - m * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

Observable gaussian(int dim, double sigma) {
  require(dim >= 1, "observable dimension must be >= 1");
  require(sigma > 0.0 && std::isfinite(sigma), "gaussian sigma must be positive");
  Observable obs;
  obs.dim = dim;
  // Evaluated on sigma * x so that alpha_sigma(x) = alpha_1(sigma x) holds bit for bit.
  obs.eval_x = [sigma](std::span<const double> x) {
    double s = 0.0;
    for (double c : x) s += (sigma * c) * (sigma * c);
    return Complex{std::exp(-0.5 * s), 0.0};
  };
  const double norm = std::pow(2.0 * std::numbers::pi * sigma * sigma, -0.5 * dim);
  obs.eval_k = [sigma, norm](std::span<const double> k) { return norm * std::exp(-0.5 * norm2(k) / (sigma * sigma)); };
  obs.deriv_norm = [sigma, dim](std::span<const double> x, int k) {
    const double r = std::sqrt(norm2(x));
    const double base = std::pow(sigma, k) * std::exp(-0.5 * sigma * sigma * r * r);
    if (k == 0) return base;
    // d^k/dt^k exp(-sigma^2 |x + t e|^2 / 2) at t = 0 equals
    // (-sigma)^k He_k(sigma x.e) exp(-sigma^2 |x|^2 / 2); the norm of a symmetric
    // multilinear form is attained on the diagonal.
    if (dim == 1) return base * std::abs(hermite_he(k, sigma * r));
    return base * max_abs_hermite(k, sigma * r);
  };
  obs.tail_radius = [sigma](double tol) { return gaussian_tail(sigma, tol); };
  obs.k_tail_radius = [sigma](double tol) { return sigma * (std::sqrt(2.0 * std::log(1.0 / std::clamp(tol, 1e-300, 0.5))) + 4.0); };
  obs.k_center.assign(static_cast<std::size_t>(dim), 0.0);
  obs.analytic = true;
  obs.radially_decreasing = true;
  std::ostringstream label;
  label.precision(17);
  label << "gaussian(dim=" << dim << ",sigma=" << sigma << ")";
  obs.label = label.str();
  return obs;
}

Observable modulated_gaussian(int dim, double sigma, std::vector<double> k0) {
  require(static_cast<int>(k0.size()) == dim, "modulation centre has wrong dimension");
  Observable obs = gaussian(dim, sigma);
  auto base_x = obs.eval_x;
  auto base_k = obs.eval_k;
  obs.eval_x = [base_x, k0](std::span<const double> x) {
    double phase = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) phase += x[a] * k0[a];
    return base_x(x) * std::polar(1.0, phase);
  };
  obs.eval_k = [base_k, k0](std::span<const double> k) {
    std::vector<double> shifted(k.begin(), k.end());
    for (std::size_t a = 0; a < shifted.size(); ++a) shifted[a] -= k0[a];
    return base_k(shifted);
  };
  obs.deriv_norm = nullptr;
  obs.k_center = k0;
  obs.analytic = false;
  obs.radially_decreasing = false;
  std::ostringstream label;
  label.precision(17);
  label << "modulated_gaussian(dim=" << dim << ",sigma=" << sigma << ",k0=[";
  for (std::size_t a = 0; a < k0.size(); ++a) label << (a ? "," : "") << k0[a];
  label << "])";
  obs.label = label.str();
  return obs;
}

Observable constant_observable(int dim, double c) {
  Observable obs;
  obs.dim = dim;
  obs.eval_x = [c](std::span<const double>) { return Complex{c, 0.0}; };
  obs.deriv_norm = [c](std::span<const double>, int k) { return k == 0 ? std::abs(c) : 0.0; };
  obs.tail_radius = [](double) { return 1.0; };
  obs.analytic = true;
  obs.radially_decreasing = true;
  obs.integrable = (c == 0.0);
  obs.label = "constant(" + std::to_string(c) + ")";
  return obs;
}

Observable scaled(const Observable& obs, double c) {
  Observable out = obs;
  auto ex = obs.eval_x;
  out.eval_x = [ex, c](std::span<const double> x) { return c * ex(x); };
  if (obs.eval_k) {
    auto ek = obs.eval_k;
    out.eval_k = [ek, c](std::span<const double> k) { return c * ek(k); };
  }
  if (obs.deriv_norm) {
    auto dn = obs.deriv_norm;
    out.deriv_norm = [dn, c](std::span<const double> x, int k) { return std::abs(c) * dn(x, k); };
  }
  out.radially_decreasing = obs.radially_decreasing && c >= 0.0;
  std::ostringstream label;
  label.precision(17);
  label << c << "*" << obs.label;
  out.label = label.str();
  return out;
}

Observable shifted(const Observable& obs, double c) {
  Observable out = obs;
  auto ex = obs.eval_x;
  out.eval_x = [ex, c](std::span<const double> x) { return ex(x) + c; };
  out.eval_k = nullptr;
  if (obs.deriv_norm) {
    auto dn = obs.deriv_norm;
    auto ex0 = obs.eval_x;
    out.deriv_norm = [dn, ex0, c](std::span<const double> x, int k) {
      return k == 0 ? std::abs(ex0(x) + c) : dn(x, k);
    };
  }
  out.integrable = obs.integrable && c == 0.0;
  std::ostringstream label;
  label.precision(17);
  label << obs.label << "+" << c;
  out.label = label.str();
  return out;
}

Observable observable_from_json(const nlohmann::json& j, int dim) {
  try {
    require(j.is_object(), "observable must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (it.key() != "type" && it.key() != "sigma" && it.key() != "center") {
        fail(ErrorCode::Config, "observable: unknown key '" + it.key() + "'");
      }
    }
    const std::string type = j.at("type").get<std::string>();
    if (type != "gaussian") fail(ErrorCode::Config, "observable type must be \"gaussian\"");
    const double sigma = j.at("sigma").get<double>();
    if (!(sigma > 0.0)) fail(ErrorCode::Config, "observable sigma must be positive");
    if (j.contains("center")) return modulated_gaussian(dim, sigma, j.at("center").get<std::vector<double>>());
    return gaussian(dim, sigma);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Config, std::string("observable: ") + e.what());
  }
}

double numeric_derivative_norm(const Observable& obs, std::span<const double> x, int order, double h,
                               double tolerance) {
  require(static_cast<int>(x.size()) == obs.dim, "probe point has wrong dimension");
  require(order >= 0 && order <= obs.dim + 1, "derivative order must lie in [0, dim + 1]");
  require(h > 0.0, "finite-difference step must be positive");
  if (order == 0) return std::abs(obs.eval_x(x));
  const auto dirs = direction_grid(obs.dim);
  const double coarse = direction_sup(obs, x, order, h, dirs);
  const double fine = direction_sup(obs, x, order, 0.5 * h, dirs);
  if (std::abs(coarse - fine) > tolerance * std::max(1.0, fine)) {
    std::ostringstream msg;
    msg << "finite-difference derivative ill-conditioned at order " << order << ": " << coarse << " vs " << fine;
    fail(ErrorCode::Numeric, msg.str());
  }
  return fine;
}

double symmetry_violation(const Observable& obs, int n_probes, double radius, bool hermitian) {
  SplitMix64 rng(0x5eedULL + static_cast<std::uint64_t>(obs.dim));
  std::vector<double> x(static_cast<std::size_t>(obs.dim)), mx(x.size());
  double worst = 0.0;
  for (int p = 0; p < n_probes; ++p) {
    for (std::size_t a = 0; a < x.size(); ++a) {
      x[a] = radius * (2.0 * rng.uniform() - 1.0);
      mx[a] = -x[a];
    }
    const Complex v = obs.eval_x(x), w = obs.eval_x(mx);
    worst = std::max(worst, std::abs(std::abs(v) - std::abs(w)));
    if (hermitian) worst = std::max(worst, std::abs(w - std::conj(v)));
  }
  return worst;
}

double intensity(const PointSet& ps, const Sample& sample, std::span<const double> k) {
  require(sample.kind == Model::A && sample.size() == ps.size(), "intensity needs a Model A sample matching the point set");
  Complex acc{0.0, 0.0};
  for (std::size_t i = 0; i < ps.size(); ++i) {
    auto p = ps.point(i);
    double phase = 0.0;
    for (std::size_t a = 0; a < p.size(); ++a) phase += k[a] * p[a];
    acc += sample.amplitudes[i] * std::polar(1.0, phase);
  }
  return std::norm(acc);
}

double intensity_integral_1d(const PointSet& ps, const Sample& sample, const Observable& obs, double rel_tol) {
  require(ps.dim() == 1 && obs.dim == 1, "intensity integral is implemented in one dimension");
  require(obs.eval_k && obs.k_tail_radius, "observable needs a k-space density");
  const double centre = obs.k_center.empty() ? 0.0 : obs.k_center[0];
  const double radius = obs.k_tail_radius(1e-16);
  double lo = ps.point(0)[0], hi = lo;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    lo = std::min(lo, ps.point(i)[0]);
    hi = std::max(hi, ps.point(i)[0]);
  }
  // Pieces of roughly eight oscillation periods each keep the adaptive rule local.
  const double span = std::max(hi - lo, 1.0);
  const double piece = 8.0 * 2.0 * std::numbers::pi / span;
  const int pieces = std::max(1, static_cast<int>(std::ceil(2.0 * radius / piece)));
  auto f = [&](double k) {
    const double kk[1] = {k};
    return intensity(ps, sample, kk) * obs.eval_k(kk);
  };
  double total = 0.0;
  for (int p = 0; p < pieces; ++p) {
    const double a = centre - radius + 2.0 * radius * p / pieces;
    const double b = centre - radius + 2.0 * radius * (p + 1) / pieces;
    total += quad::integrate(f, a, b, rel_tol).value;
  }
  return total / static_cast<double>(ps.size());
}

}  // namespace rdiff
