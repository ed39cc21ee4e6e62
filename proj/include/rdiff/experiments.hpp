#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdiff/correlation.hpp"
#include "rdiff/observables.hpp"
#include "rdiff/pointset.hpp"
#include "rdiff/rates.hpp"
#include "rdiff/scatterers.hpp"

namespace rdiff {

inline constexpr std::size_t kMaxExactSites = 14;
inline constexpr std::uint64_t kMaxExactConfigurations = std::uint64_t{1} << 20;

struct Outcome {
  double prob = 0.0;
  Complex value;  // X_r or Y_r
};

/// Exact law of the centered variable, one outcome per configuration.
struct ExactDistribution {
  std::vector<Outcome> outcomes;
  std::uint64_t total_configs = 0;

  double total_probability() const;
  Complex mean() const;
  double second_moment() const;  // E|X|^2
  /// P(|X| >= threshold); ties count as exceedances.
  double tail(double threshold) const;
  /// Sorted distinct values of |X|.
  std::vector<double> distinct_moduli() const;
};

ExactDistribution enumerate_exact(const PointSet& ps, const ScattererSpec& spec, const Observable& obs);

/// Runs body(i) for i in [0, n) on up to `threads` workers. Each index is
/// handled exactly once; callers write results by index.
void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body);

/// Centered values of n_samples independent draws; draw k uses derive_seed(seed, k).
std::vector<Complex> mc_centered(const PairTable& table, const ScattererSpec& spec, std::size_t n_samples,
                                 std::uint64_t seed, int threads = 1);

struct TailEstimate {
  std::size_t hits = 0;
  std::size_t n = 0;
  double p_hat = 0.0;
  double ci_low = 0.0;
  double ci_high = 1.0;
};

/// Clopper-Pearson interval at the given two-sided confidence.
TailEstimate clopper_pearson(std::size_t hits, std::size_t n, double confidence = 0.99);

/// Frequency of |X| >= epsilon * n among the samples.
TailEstimate tail_from_samples(const std::vector<Complex>& samples, double threshold);

TailEstimate mc_tail(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, double epsilon,
                     std::size_t n_samples, std::uint64_t seed, int threads = 1);

/// Structured verification result. Keys of `verdicts` also appear in
/// `empirical` and `theoretical`.
struct ExperimentReport {
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json empirical = nlohmann::json::object();
  nlohmann::json theoretical = nlohmann::json::object();
  nlohmann::json verdicts = nlohmann::json::object();
  double runtime_seconds = 0.0;
  std::uint64_t seed = 0;

  bool pass() const;
  void verdict(const std::string& name, nlohmann::json empirical_value, nlohmann::json theoretical_value, bool ok);
  nlohmann::json to_json(bool include_runtime) const;
};

struct LdOptions {
  std::vector<double> epsilons;
  std::size_t n_samples = 10000;
  Theorem which = Theorem::ASimple;
  std::uint64_t seed = 0;
  int threads = 1;
  RateParams params = RateParams::published();
  double confidence = 0.99;
};

struct LdResult {
  ExperimentReport report;
  std::vector<Complex> samples;
};

LdResult verify_ld_bound(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, const LdOptions& opt);

struct LaplaceOptions {
  std::vector<double> scales;  // multipliers c applied to alpha
  RateParams params = RateParams::published();
  /// Decades below the largest scale used for the cubic-order slope check.
  double slope_decades = 2.0;
  double min_slope = 2.9;
};

/// Signed gap log E exp(Y) - E Y^2 / 2 of a real exact distribution scaled by c.
double laplace_gap(const ExactDistribution& dist, double c);

ExperimentReport verify_laplace_gap(const PointSet& ps, const ScattererSpec& spec, const Observable& obs,
                                    const LaplaceOptions& opt);

struct CltOptions {
  std::size_t n_samples = 10000;
  std::uint64_t seed = 0;
  int threads = 1;
  double ks_threshold = 0.02;
  double skew_threshold = 0.1;
  double kurtosis_threshold = 0.3;
};

struct CltResult {
  ExperimentReport report;
  std::vector<Complex> samples;
  double ks = 0.0;
  double skewness = 0.0;
  double kurtosis = 0.0;
};

CltResult clt_experiment(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, const CltOptions& opt);

/// sup |F_n - Phi| of the sample against the standard normal.
double ks_distance_normal(std::vector<double> z);

ExperimentReport verify_variance_growth(const std::vector<PointSet>& sets, const ScattererSpec& spec,
                                        const Observable& obs);

}  // namespace rdiff
