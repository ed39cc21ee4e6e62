#pragma once

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "rdiff/observables.hpp"
#include "rdiff/pointset.hpp"

namespace rdiff {

enum class NormMethod { ExactSum, Quadrature, GridSupremum, RadialExact };

std::string to_string(NormMethod m);

struct NormValue {
  double value = 0.0;
  NormMethod method = NormMethod::ExactSum;
  double tolerance = 0.0;  // estimated absolute numerical error
};

/// sup over x of sum over z of |alpha(x - z)|, diagonal term included.
NormValue gamma_norm(const Observable& obs, const PointSet& ps);

struct SeminormOptions {
  /// Allowed change of the estimate under grid refinement.
  double tolerance = 1e-9;
  /// Use the closed form when the observable is radially non-increasing.
  bool allow_radial_exact = true;
};

/// sup over x of sum over y != x of the oscillation of alpha on the ball
/// B_{2 delta}(x - y). Exact for radially non-increasing alpha; otherwise a
/// product-grid search (refined locally for real alpha).
NormValue gamma_delta_seminorm(const Observable& obs, const PointSet& ps, double delta,
                               const SeminormOptions& opts = {});

/// Oscillation sup_{|z|,|z'| <= rho} |alpha(w + z) - alpha(w + z')| for one ball.
double ball_oscillation(const Observable& obs, std::span<const double> w, double rho, double min_spacing,
                        const SeminormOptions& opts = {}, NormMethod* method = nullptr, double* tolerance = nullptr);

/// Integral over R^dim of |d^k alpha| (dim 1 or 2), truncated at tail_radius.
NormValue derivative_integral(const Observable& obs, int order, double rel_tol = 1e-12);

/// Same integral restricted to |y| >= r_in.
NormValue derivative_integral_exterior(const Observable& obs, int order, double r_in, double rel_tol = 1e-12);

/// (1/|B_1|) sum_{k=0}^{dim} (1/k!) (a/2)^{k-dim} * integral |d^k alpha|.
NormValue sobolev_norm(const Observable& obs, double a);

/// As sobolev_norm with derivative orders shifted by one.
NormValue sobolev_d_norm(const Observable& obs, double a);

double unit_ball_volume(int dim);

struct NormCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  bool pass = false;
  bool vacuous = false;
  std::string method;
  double tolerance = 0.0;
  double a = 0.0;
  std::optional<double> secondary_rhs;  // exterior-integral bound of the seminorm check
  std::optional<bool> secondary_pass;
};

nlohmann::json to_json(const NormCheck& c);

/// gamma_norm <= sobolev_norm(a) with a the verified minimal distance.
NormCheck check_gamma_domination(const Observable& obs, const PointSet& ps, double slack = 1e-8);

/// gamma_delta_seminorm <= 4 delta sobolev_d_norm(a - 4 delta); requires a - 4 delta > 0.
NormCheck check_seminorm_domination(const Observable& obs, const PointSet& ps, double delta, double slack = 1e-8);

}  // namespace rdiff
