#include "rdiff/rates.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rdiff/error.hpp"

namespace rdiff {

namespace {

constexpr int kGridPoints = 1000;
constexpr double kMonotoneTolerance = 1e-9;
constexpr double kBudgetSlack = 0.5;

struct Budget {
  double leading, middle, last;
};
constexpr Budget kDBudget{4352.0, 63.0, 124.0};
constexpr Budget kDTildeBudget{4352.0, 10.0, 12.0};

bool within(const HBreakdown& b, const Budget& budget) {
  return b.leading <= budget.leading + kBudgetSlack && b.middle <= budget.middle + kBudgetSlack &&
         b.last <= budget.last + kBudgetSlack;
}

// Supremum of h(2x, v(x)) / x^3 over a geometric grid of (0, d] plus the endpoint.
struct GridSup {
  double endpoint;
  bool monotone;
};

GridSup grid_sup(double d, bool diagonal, const RateParams& p) {
  auto ratio = [&](double x) { return h(2.0 * x, diagonal ? x : 0.0, p) / (x * x * x); };
  const double end = ratio(d);
  double best = end;
  const double lo = d * 1e-4;
  for (int i = 0; i < kGridPoints; ++i) {
    const double x = lo * std::pow(d / lo, static_cast<double>(i) / kGridPoints);
    best = std::max(best, ratio(x));
  }
  return {end, best <= end * (1.0 + kMonotoneTolerance)};
}

HBreakdown scaled(HBreakdown b, double c) {
  b.leading *= c;
  b.middle *= c;
  b.last *= c;
  return b;
}

nlohmann::json breakdown_json(const HBreakdown& b) {
  return {{"leading", b.leading}, {"middle", b.middle}, {"last", b.last}, {"total", b.total()}};
}

}  // namespace

RateParams RateParams::published() { return RateParams{}; }

RateParams RateParams::precise() {
  RateParams p;
  p.use_precise_d = true;
  const double d3 = p.d * p.d * p.d;
  p.D = h(2.0 * p.d, p.d, p) / d3;
  p.D_tilde = h(2.0 * p.d, 0.0, p) / d3;
  return p;
}

double g_series(int l, double s) {
  require(l >= 0, "g_series order must be non-negative");
  require(s >= 0.0 && std::isfinite(s), "g_series argument must be finite and non-negative");
  if (l == 0) return std::exp(s);
  if (l == 1) return std::expm1(s);
  if (s == 0.0) return 0.0;
  if (s < 50.0) {
    // All terms are positive, so the direct tail has no cancellation.
    double term = 1.0;
    for (int i = 1; i <= l; ++i) term *= s / i;
    double sum = 0.0;
    for (int i = l; term > std::numeric_limits<double>::epsilon() * 0.25 * sum || i == l; ++i) {
      sum += term;
      term *= s / (i + 1);
    }
    return sum;
  }
  double head = 0.0, term = 1.0;
  for (int i = 0; i < l; ++i) {
    head += term;
    term *= s / (i + 1);
  }
  return std::exp(s) - head;
}

double l_series(double x) {
  if (!(x >= 0.0 && x < 1.0)) {
    std::ostringstream msg;
    msg << "l(x) requires 0 <= x < 1, got " << x;
    fail(ErrorCode::Domain, msg.str());
  }
  if (x < 0.1) {
    double sum = 0.0, pow = x * x;
    for (int k = 2; k < 60; ++k) {
      const double term = pow / k;
      sum += term;
      if (term < std::numeric_limits<double>::epsilon() * 0.25 * sum) break;
      pow *= x;
    }
    return sum;
  }
  return -std::log1p(-x) - x;
}

std::array<double, 13> h_terms(double u, double v, const RateParams& p) {
  require(u >= 0.0 && v >= 0.0, "h requires non-negative arguments");
  const double ls = p.lambda_star;
  const double g1u = g_series(1, u), g2u = g_series(2, u), g3u = g_series(3, u);
  const double g1_2v = g_series(1, 2.0 * v), g2_2v = g_series(2, 2.0 * v), g1_3v = g_series(1, 3.0 * v);
  const double e2v = std::exp(2.0 * v), e3v = std::exp(3.0 * v);
  const double bracket = 2.0 * v * g1_2v + g2_2v * e2v;
  const double mixed = u * g1_2v * e2v + g2u;
  auto l_ctx = [](double x, const char* where) {
    try {
      return l_series(x);
    } catch (const Error& e) {
      fail(ErrorCode::Domain, std::string("h: ") + where + ": " + e.what());
    }
  };
  return {
      p.a_star / (ls * ls * ls) * g1u * g1u * g1u,
      l_ctx(g_series(2, v), "l(g2(v))"),
      g_series(3, v),
      0.5 * u * bracket,
      0.25 * u * u * g1_2v * (1.0 + e2v),
      0.5 * g3u,
      2.0 * u * g2u,
      g2u * g2u,
      2.0 * u * bracket,
      0.5 * u * u * g1_3v * (1.0 + e3v),
      0.5 * l_ctx(mixed, "l(u g1(2v) e^{2v} + g2(u))"),
      l_ctx(g1u * g1u, "l(g1(u)^2)"),
      p.a_star / (ls * ls) * mixed * mixed,
  };
}

double h(double u, double v, const RateParams& p) {
  const auto t = h_terms(u, v, p);
  double sum = 0.0;
  for (double x : t) sum += x;
  return sum;
}

HBreakdown h_breakdown(double u, double v, const RateParams& p) {
  const auto t = h_terms(u, v, p);
  HBreakdown b;
  b.leading = t.front();
  b.last = t.back();
  for (std::size_t i = 1; i + 1 < t.size(); ++i) b.middle += t[i];
  return b;
}

ConstantsReport recompute_constants(const RateParams& p) {
  ConstantsReport r;
  r.lambda_star = p.lambda_star;
  r.a_star = p.a_star;
  r.d = 0.5 * std::log1p(p.lambda_star);
  r.d_rounded = p.d_rounded;
  r.D_default = p.D;
  r.D_tilde_default = p.D_tilde;

  const double d3 = r.d * r.d * r.d;
  const GridSup full = grid_sup(r.d, true, p);
  const GridSup diag = grid_sup(r.d, false, p);
  r.D = full.endpoint;
  r.D_tilde = diag.endpoint;
  r.D_monotone = full.monotone;
  r.D_tilde_monotone = diag.monotone;
  r.D_terms = scaled(h_breakdown(2.0 * r.d, r.d, p), 1.0 / d3);
  r.D_tilde_terms = scaled(h_breakdown(2.0 * r.d, 0.0, p), 1.0 / d3);

  const double dr = r.d_rounded;
  const double dr3 = dr * dr * dr;
  r.D_at_rounded = h(2.0 * dr, dr, p) / dr3;
  r.D_tilde_at_rounded = h(2.0 * dr, 0.0, p) / dr3;

  r.D_within_budget = within(r.D_terms, kDBudget);
  r.D_tilde_within_budget = within(r.D_tilde_terms, kDTildeBudget);
  const double worst_D = std::max(r.D, r.D_at_rounded);
  const double worst_Dt = std::max(r.D_tilde, r.D_tilde_at_rounded);
  r.defaults_dominate = p.D >= worst_D * (1.0 - 1e-6) && p.D_tilde >= worst_Dt * (1.0 - 1e-6) && p.D_tilde <= p.D;
  return r;
}

nlohmann::json to_json(const ConstantsReport& r) {
  return {
      {"lambda_star", r.lambda_star},
      {"a_star", r.a_star},
      {"d", r.d},
      {"d_rounded", r.d_rounded},
      {"D_default", r.D_default},
      {"D_tilde_default", r.D_tilde_default},
      {"D", r.D},
      {"D_tilde", r.D_tilde},
      {"D_at_rounded_d", r.D_at_rounded},
      {"D_tilde_at_rounded_d", r.D_tilde_at_rounded},
      {"D_terms", breakdown_json(r.D_terms)},
      {"D_tilde_terms", breakdown_json(r.D_tilde_terms)},
      {"D_budget", {{"leading", kDBudget.leading}, {"middle", kDBudget.middle}, {"last", kDBudget.last}}},
      {"D_tilde_budget",
       {{"leading", kDTildeBudget.leading}, {"middle", kDTildeBudget.middle}, {"last", kDTildeBudget.last}}},
      {"D_monotone", r.D_monotone},
      {"D_tilde_monotone", r.D_tilde_monotone},
      {"D_within_budget", r.D_within_budget},
      {"D_tilde_within_budget", r.D_tilde_within_budget},
      {"defaults_dominate", r.defaults_dominate},
  };
}

std::string to_text(const ConstantsReport& r) {
  std::string out;
  char buf[160];
  auto row = [&](const char* name, double v) {
    std::snprintf(buf, sizeof buf, "%-24s %.10g\n", name, v);
    out += buf;
  };
  auto terms = [&](const char* name, const HBreakdown& b) {
    std::snprintf(buf, sizeof buf, "%-24s %.2f + %.2f + %.2f = %.2f\n", name, b.leading, b.middle, b.last,
                  b.total());
    out += buf;
  };
  auto flag = [&](const char* name, bool v) {
    std::snprintf(buf, sizeof buf, "%-24s %s\n", name, v ? "yes" : "no");
    out += buf;
  };
  row("lambda_star", r.lambda_star);
  row("a_star", r.a_star);
  row("d", r.d);
  row("d_rounded", r.d_rounded);
  row("D = h(2d,d)/d^3", r.D);
  row("D_tilde = h(2d,0)/d^3", r.D_tilde);
  row("D at d_rounded", r.D_at_rounded);
  row("D_tilde at d_rounded", r.D_tilde_at_rounded);
  row("D (default)", r.D_default);
  row("D_tilde (default)", r.D_tilde_default);
  terms("D terms", r.D_terms);
  terms("D_tilde terms", r.D_tilde_terms);
  flag("D monotone", r.D_monotone);
  flag("D_tilde monotone", r.D_tilde_monotone);
  flag("D within budget", r.D_within_budget);
  flag("D_tilde within budget", r.D_tilde_within_budget);
  flag("defaults dominate", r.defaults_dominate);
  return out;
}

double rate_J(double eps_bar, double d, double D) {
  require(eps_bar >= 0.0, "rate_J requires eps_bar >= 0");
  require(D > 0.0 && d > 0.0, "rate_J requires d, D > 0");
  if (std::isinf(eps_bar)) return eps_bar;
  if (eps_bar <= d * (4.0 + 3.0 * D * d)) {
    // (1 + x)^{3/2} - 1 - 3x/2 = e^2 (3/2 + e) with e = sqrt(1 + x) - 1.
    const double x = 0.75 * D * eps_bar;
    const double e = x / (1.0 + std::sqrt(1.0 + x));
    return 16.0 / (27.0 * D * D) * e * e * (1.5 + e);
  }
  return d * (eps_bar - d * (2.0 + d * D));
}

RateValue rate_j_full(double eps_bar, double s, double d, double D) {
  require(eps_bar >= 0.0 && s >= 0.0 && d >= 0.0, "rate_j requires non-negative arguments");
  require(D > 0.0, "rate_j requires D > 0");
  if (std::isinf(eps_bar)) return {eps_bar, d};
  if (eps_bar <= d * (s + 3.0 * D * d)) {
    // R^3 - 18 D eps s - s^3 = e^2 (R + s/2) with R = sqrt(12 D eps + s^2), e = R - s.
    const double E = 12.0 * D * eps_bar;
    const double R = std::sqrt(E + s * s);
    const double e = E == 0.0 ? 0.0 : E / (R + s);
    return {e * e * (R + 0.5 * s) / (108.0 * D * D), e / (6.0 * D)};
  }
  return {d * (eps_bar - d * (0.5 * s + d * D)), d};
}

std::string to_string(Theorem t) {
  switch (t) {
    case Theorem::ASimple: return "A-simple";
    case Theorem::AAddition: return "A-addition";
    case Theorem::BSimple: return "B-simple";
    case Theorem::BAddition: return "B-addition";
  }
  return "unknown";
}

Theorem theorem_from_string(const std::string& s) {
  for (Theorem t : {Theorem::ASimple, Theorem::AAddition, Theorem::BSimple, Theorem::BAddition}) {
    if (to_string(t) == s) return t;
  }
  fail(ErrorCode::Config, "unknown theorem selector '" + s + "'");
}

double ld_bound(const BoundInputs& in, Theorem which, const RateParams& p) {
  require(in.scale > 0.0 && std::isfinite(in.scale), "ld_bound requires a positive scale");
  require(in.epsilon >= 0.0, "ld_bound requires epsilon >= 0");
  require(in.cardinality >= 1, "ld_bound requires a non-empty point set");
  const double eps_bar = in.epsilon / in.scale;
  const double d = p.d_eval();
  double rate = 0.0;
  switch (which) {
    case Theorem::ASimple: rate = rate_J(eps_bar, d, p.D); break;
    case Theorem::BSimple: rate = rate_J(eps_bar, d, p.D_tilde); break;
    case Theorem::AAddition:
    case Theorem::BAddition:
      require(in.s >= 0.0 && in.s <= 4.0 + 1e-12, "normalized variance must lie in [0, 4]");
      rate = rate_j(eps_bar, std::min(in.s, 4.0), d, which == Theorem::AAddition ? p.D : p.D_tilde);
      break;
  }
  return std::min(2.0, 2.0 * std::exp(-static_cast<double>(in.cardinality) * rate));
}

double laplace_gap_bound(std::size_t cardinality, double scale, Model model, const RateParams& p) {
  require(scale >= 0.0 && std::isfinite(scale), "scale must be finite and non-negative");
  const double d = p.d_eval();
  if (scale > d) {
    std::ostringstream msg;
    msg << "scale " << scale << " exceeds d = " << d << "; outside the convergent regime";
    fail(ErrorCode::Domain, msg.str());
  }
  const double c = model == Model::A ? p.D : p.D_tilde;
  return static_cast<double>(cardinality) * c * scale * scale * scale;
}

}  // namespace rdiff
