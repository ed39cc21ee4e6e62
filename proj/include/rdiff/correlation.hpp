#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "rdiff/observables.hpp"
#include "rdiff/pointset.hpp"
#include "rdiff/scatterers.hpp"

namespace rdiff {

/// Neumaier-compensated running sum.
template <class T>
class CompensatedSum {
 public:
  void add(T x) {
    const T t = sum_ + x;
    if constexpr (std::is_same_v<T, double>) {
      comp_ += std::abs(sum_) >= std::abs(x) ? (sum_ - t) + x : (x - t) + sum_;
    } else {
      comp_ += T(part(sum_.real(), x.real(), t.real()), part(sum_.imag(), x.imag(), t.imag()));
    }
    sum_ = t;
  }
  T value() const { return sum_ + comp_; }

 private:
  static double part(double s, double x, double t) { return std::abs(s) >= std::abs(x) ? (s - t) + x : (x - t) + s; }
  T sum_{};
  T comp_{};
};

/// (1/n) sum over ordered pairs of eta_x conj(eta_x') alpha(x - x').
Complex autocorr_A(const PointSet& ps, const Sample& sample, const Observable& obs);

/// (1/n) sum over ordered pairs of alpha(x - x' + omega_x - omega_x').
Complex autocorr_B(const PointSet& ps, const Sample& sample, const Observable& obs);

Complex autocorr(const PointSet& ps, const Sample& sample, const Observable& obs);

/// Exact mean of autocorr_A: mean-field term plus the diagonal variance term.
Complex exact_mean_A(const PointSet& ps, const AmplitudeSpec& spec, const Observable& obs);

/// Exact mean of autocorr_B by summing over the product support of each ordered pair.
Complex exact_mean_B(const PointSet& ps, const DislocationSpec& spec, const Observable& obs);

Complex exact_mean(const PointSet& ps, const ScattererSpec& spec, const Observable& obs);

/// k-space route to exact_mean_B for i.i.d. dislocations in one dimension:
/// integral of phi(k) (g0(k) |m(k)|^2 + 1 - |m(k)|^2) dk, where g0 is the
/// normalized intensity of the undisplaced set and m the characteristic
/// function of the dislocation law.
double debye_waller_mean_1d(const PointSet& ps, const DislocationSpec& spec, const Observable& obs,
                            double rel_tol = 1e-12);

/// n * autocorr as a sum of site terms and unordered pair terms, each tabulated
/// over the finite supports of the sites involved. Model A pair term:
/// alpha(x-y) v conj(w) + alpha(y-x) w conj(v); site term alpha(0)|v|^2.
/// Model B pair term: alpha(x-y+v-w) + alpha(y-x+w-v); site term alpha(0).
class PairTable {
 public:
  PairTable(const PointSet& ps, const ScattererSpec& spec, const Observable& obs);

  std::size_t size() const noexcept { return n_; }
  Model model() const noexcept { return model_; }
  std::size_t support(std::size_t site) const { return probs_[site].size(); }
  double prob(std::size_t site, std::size_t index) const { return probs_[site][index]; }

  /// n * autocorr for the configuration with the given support indices.
  Complex value(std::span<const std::uint32_t> idx) const;
  /// Exact mean of value(), summed in the same order.
  Complex mean() const noexcept { return mean_; }
  /// value(idx) - mean(): X_r or Y_r.
  Complex centered(std::span<const std::uint32_t> idx) const { return value(idx) - mean_; }

  /// E|X|^2 from the Hoeffding decomposition into site and pair components.
  double variance_hoeffding() const;
  /// E|X|^2 by summing over every configuration; requires at most 2^20 configurations.
  double variance_enumeration() const;
  /// Number of configurations, saturating at UINT64_MAX.
  std::uint64_t configurations() const;

 private:
  std::size_t pair_index(std::size_t x, std::size_t y) const { return x * n_ - x * (x + 1) / 2 + (y - x - 1); }
  const Complex* pair(std::size_t x, std::size_t y) const { return pairs_.data() + pair_offset_[pair_index(x, y)]; }

  std::size_t n_;
  Model model_;
  std::vector<std::vector<double>> probs_;
  std::vector<std::vector<Complex>> site_;
  std::vector<std::size_t> pair_offset_;
  std::vector<Complex> pairs_;
  Complex mean_;
};

Complex centered_value(const PointSet& ps, const ScattererSpec& spec, const Sample& sample, const Observable& obs);

enum class VariancePath { Auto, Hoeffding, Enumeration };

std::string to_string(VariancePath p);

struct CenteredStats {
  Complex mean;               // exact mean of the normalized autocorrelation
  double variance = 0.0;      // E|X_r|^2 or E|Y_r|^2
  double normalized = 0.0;    // s_r or q_r
  double scale = 0.0;         // K ||alpha||_Gamma or ||alpha||_{Gamma,delta}
  VariancePath path = VariancePath::Hoeffding;
  bool cross_checked = false;  // both paths ran and agreed
};

/// Sites up to which Auto also runs the enumeration path as a cross-check.
inline constexpr std::size_t kEnumerationSites = 12;

/// Exact variance and its normalization. Auto runs the Hoeffding path and,
/// for at most kEnumerationSites sites, certifies it by enumeration.
CenteredStats exact_variance(const PointSet& ps, const ScattererSpec& spec, const Observable& obs,
                             VariancePath path = VariancePath::Auto);

/// K ||alpha||_Gamma for Model A, ||alpha||_{Gamma,delta} for Model B.
double normalization_scale(const PointSet& ps, const ScattererSpec& spec, const Observable& obs);

}  // namespace rdiff
