#pragma once

#include <array>
#include <cmath>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rdiff/scatterers.hpp"

namespace rdiff {

/// Universal constants of the cluster-expansion bounds.
///
/// `d` always holds 0.5*log(1 + lambda_star). The theorem-level evaluators
/// use `d_eval()`, which is the rounded `d_rounded` unless `use_precise_d`.
struct RateParams {
  double lambda_star = 0.110909;
  double a_star = 0.633;
  double d = 0.5 * std::log1p(0.110909);
  double d_rounded = 0.0525;
  double D = 4540.0;
  double D_tilde = 4380.0;
  bool use_precise_d = false;

  double d_eval() const noexcept { return use_precise_d ? d : d_rounded; }

  /// Rounded published constants (the default).
  static RateParams published();
  /// Precise d and D, D_tilde recomputed from h at that d.
  static RateParams precise();
};

/// g_l(s) = sum_{i >= l} s^i / i!, s >= 0.
double g_series(int l, double s);

/// l(x) = -log(1 - x) - x for 0 <= x < 1.
double l_series(double x);

/// The thirteen terms of the error function h(u, v), in printed order.
std::array<double, 13> h_terms(double u, double v, const RateParams& p);

/// Sum of h_terms.
double h(double u, double v, const RateParams& p);

/// h split into first term, last term and the remaining middle terms.
struct HBreakdown {
  double leading = 0.0;
  double middle = 0.0;
  double last = 0.0;
  double total() const noexcept { return leading + middle + last; }
};

HBreakdown h_breakdown(double u, double v, const RateParams& p);

struct ConstantsReport {
  double lambda_star = 0.0;
  double a_star = 0.0;
  double d = 0.0;
  double d_rounded = 0.0;
  double D_default = 0.0;
  double D_tilde_default = 0.0;
  /// h(2x, x) / x^3 and h(2x, 0) / x^3 at x = d and at x = d_rounded.
  double D = 0.0;
  double D_tilde = 0.0;
  double D_at_rounded = 0.0;
  double D_tilde_at_rounded = 0.0;
  HBreakdown D_terms;        // divided by d^3
  HBreakdown D_tilde_terms;  // divided by d^3
  /// Grid supremum over (0, d] attained at the endpoint.
  bool D_monotone = false;
  bool D_tilde_monotone = false;
  /// Printed per-term budgets 4352 / 63 / 124 and 4352 / 10 / 12, with half-unit rounding slack.
  bool D_within_budget = false;
  bool D_tilde_within_budget = false;
  bool defaults_dominate = false;
};

ConstantsReport recompute_constants(const RateParams& p = RateParams::published());

nlohmann::json to_json(const ConstantsReport& r);
std::string to_text(const ConstantsReport& r);

/// Universal rate function J built from (d, D).
double rate_J(double eps_bar, double d, double D);
inline double rate_J(double eps_bar, const RateParams& p) { return rate_J(eps_bar, p.d_eval(), p.D); }

struct RateValue {
  double value = 0.0;
  double t = 0.0;  // maximizer of eps_bar t - s t^2 / 2 - D t^3 over [0, d]
};

/// j_{d,D}(eps_bar; s) with its maximizer.
RateValue rate_j_full(double eps_bar, double s, double d, double D);
inline double rate_j(double eps_bar, double s, double d, double D) { return rate_j_full(eps_bar, s, d, D).value; }

enum class Theorem { ASimple, AAddition, BSimple, BAddition };

std::string to_string(Theorem t);
Theorem theorem_from_string(const std::string& s);

struct BoundInputs {
  double epsilon = 0.0;
  std::size_t cardinality = 1;
  double scale = 1.0;
  double s = 4.0;  // ignored by the simple forms
};

/// 2 exp(-n * rate(epsilon / scale)), clamped to at most 2.
double ld_bound(const BoundInputs& in, Theorem which, const RateParams& p = RateParams::published());

/// n * (D or D_tilde) * scale^3; refuses scale > d.
double laplace_gap_bound(std::size_t cardinality, double scale, Model model,
                         const RateParams& p = RateParams::published());

}  // namespace rdiff
