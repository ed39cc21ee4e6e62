#pragma once

#include <complex>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rdiff/pointset.hpp"
#include "rdiff/scatterers.hpp"

namespace rdiff {

/// A measurement function phi in k-space together with its Fourier transform
/// alpha(x) = integral of exp(i x.k) phi(k) dk in x-space.
///
/// Only `eval_x` is mandatory. `deriv_norm(x, k)` returns the operator norm of
/// the k-th differential of alpha at x; when absent, the norms fall back to
/// numeric_derivative_norm. `tail_radius(tol)` bounds the region outside of
/// which the derivative integrands are negligible.
struct Observable {
  int dim = 1;
  std::function<Complex(std::span<const double>)> eval_x;
  std::function<double(std::span<const double>)> eval_k;
  std::function<double(std::span<const double>, int)> deriv_norm;
  std::function<double(double)> tail_radius;
  /// Radius about `k_center` beyond which phi is below the given tolerance.
  std::function<double(double)> k_tail_radius;
  std::vector<double> k_center;
  bool analytic = false;
  /// alpha is real, radial and non-increasing in |x|.
  bool radially_decreasing = false;
  /// |d^k alpha| is integrable over R^dim for every supported order.
  bool integrable = true;
  std::string label;

  Complex alpha(std::span<const double> x) const { return eval_x(x); }
  double phi(std::span<const double> k) const;
};

/// phi(k) = (2 pi sigma^2)^(-dim/2) exp(-|k|^2 / (2 sigma^2)), alpha(x) = exp(-sigma^2 |x|^2 / 2).
Observable gaussian(int dim, double sigma);

/// Gaussian of width sigma centred at k0 in k-space:
/// alpha(x) = exp(i x.k0) exp(-sigma^2 |x|^2 / 2). Complex but Hermitian.
Observable modulated_gaussian(int dim, double sigma, std::vector<double> k0);

/// alpha(x) = c everywhere (no k-space density).
Observable constant_observable(int dim, double c);

/// c * alpha for real c.
Observable scaled(const Observable& obs, double c);

/// alpha + c for real c.
Observable shifted(const Observable& obs, double c);

/// Parses `{"type":"gaussian","sigma":s}` (dim supplied by the point set).
Observable observable_from_json(const nlohmann::json& j, int dim);

/// Probabilists' Hermite polynomial He_n(x).
double hermite_he(int n, double x);

/// Finite-difference estimate of the operator norm of the order-th differential
/// of alpha at x. The direction supremum runs over the 2*dim axis directions plus
/// 64*dim low-discrepancy directions (polished by golden-section search in 2-D),
/// so the result is a lower bound on the true norm up to differencing error.
/// Throws ErrorCode::Numeric when halving h moves the estimate by more than
/// `tolerance` (relative to max(1, value)).
double numeric_derivative_norm(const Observable& obs, std::span<const double> x, int order, double h,
                               double tolerance = 1e-5);

/// Samples `n_probes` points and checks |alpha(x)| = |alpha(-x)| and, when
/// `hermitian`, alpha(-x) = conj(alpha(x)); returns the largest violation.
double symmetry_violation(const Observable& obs, int n_probes, double radius, bool hermitian);

/// Normalized intensity integral (1/n) * integral |sum_x eta_x e^{ik.x}|^2 phi(k) dk in one dimension.
double intensity_integral_1d(const PointSet& ps, const Sample& sample, const Observable& obs, double rel_tol = 1e-12);

/// |sum_x eta_x e^{ik.x}|^2 without normalization.
double intensity(const PointSet& ps, const Sample& sample, std::span<const double> k);

}  // namespace rdiff
