#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "rdiff/pointset.hpp"

namespace rdiff {

using Complex = std::complex<double>;

/// Finite-support law of a complex scattering amplitude.
struct AmplitudeLaw {
  std::vector<Complex> support;
  std::vector<double> probs;

  Complex mean() const;
  double second_moment() const;  // E|eta|^2
};

/// Finite-support law of a dislocation vector; support[i] has `dim` entries.
struct DislocationLaw {
  std::vector<std::vector<double>> support;
  std::vector<double> probs;
};

/// Model A: independent amplitudes, possibly different per site.
struct AmplitudeSpec {
  std::optional<AmplitudeLaw> default_law;
  std::map<std::size_t, AmplitudeLaw> overrides;

  /// Throws if neither an override nor a default exists for `site`.
  const AmplitudeLaw& law(std::size_t site) const;
  void validate() const;
};

/// Model B: independent dislocations with |w| <= delta.
struct DislocationSpec {
  int dim = 1;
  std::optional<DislocationLaw> default_law;
  std::map<std::size_t, DislocationLaw> overrides;
  double delta = 0.0;

  const DislocationLaw& law(std::size_t site) const;
  void validate() const;
};

using ScattererSpec = std::variant<AmplitudeSpec, DislocationSpec>;

enum class Model { A, B };

inline Model model_of(const ScattererSpec& spec) {
  return std::holds_alternative<AmplitudeSpec>(spec) ? Model::A : Model::B;
}

/// A drawn realization. `indices[i]` is the support index chosen at site i;
/// `amplitudes` (Model A) or `dislocations` (Model B, row-major n x dim)
/// hold the corresponding values.
struct Sample {
  Model kind = Model::A;
  std::vector<std::uint32_t> indices;
  std::vector<Complex> amplitudes;
  std::vector<double> dislocations;
  int dim = 1;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return indices.size(); }
  std::span<const double> dislocation(std::size_t i) const {
    return {dislocations.data() + i * static_cast<std::size_t>(dim), static_cast<std::size_t>(dim)};
  }
};

/// Independent per-site draws; site i depends only on (seed, i).
Sample sample(const ScattererSpec& spec, const PointSet& ps, std::uint64_t seed);

/// Support indices of the draw `sample(spec, ps, seed)` would make on n_sites sites.
std::vector<std::uint32_t> draw_indices(const ScattererSpec& spec, std::size_t n_sites, std::uint64_t seed);

/// Builds the sample for explicit support indices (used by enumeration).
Sample sample_from_indices(const ScattererSpec& spec, const PointSet& ps, std::vector<std::uint32_t> indices);

struct AmplitudeBounds {
  double M;  // max |mean|
  double B;  // max |v - mean|
  double K;  // 2MB + B^2
};

AmplitudeBounds bounds_of(const AmplitudeSpec& spec);
double delta_of(const DislocationSpec& spec);

/// Support size of the law governing `site`.
std::size_t support_size(const ScattererSpec& spec, std::size_t site);
double law_prob(const ScattererSpec& spec, std::size_t site, std::size_t index);

/// True when every site's law has a single support point.
bool is_deterministic(const ScattererSpec& spec, std::size_t n_sites);

ScattererSpec spec_from_json(const nlohmann::json& j);
nlohmann::json spec_to_json(const ScattererSpec& spec);

/// Convenience constructors.
AmplitudeSpec bernoulli_amplitudes(double plus = 1.0, double minus = -1.0, double p_plus = 0.5);
DislocationSpec symmetric_dislocations(int dim, double delta0);

}  // namespace rdiff
