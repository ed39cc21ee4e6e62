#include "rdiff/scatterers.hpp"

#include <cmath>
#include <string>

#include <nlohmann/json.hpp>

#include "rdiff/error.hpp"
#include "rdiff/random.hpp"

namespace rdiff {

namespace {

using nlohmann::json;

void validate_probs(const std::vector<double>& probs, std::size_t support_size, const std::string& where) {
  require(support_size > 0, where + ": empty support");
  require(probs.size() == support_size, where + ": support and probs differ in length");
  double total = 0.0;
  for (double p : probs) {
    require(std::isfinite(p) && p >= 0.0, where + ": probabilities must be non-negative");
    total += p;
  }
  require(std::abs(total - 1.0) <= 1e-12, where + ": probabilities must sum to 1");
}

void validate_law(const AmplitudeLaw& law, const std::string& where) {
  validate_probs(law.probs, law.support.size(), where);
  for (const auto& v : law.support) {
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), where + ": amplitude values must be finite");
  }
}

double norm2(const std::vector<double>& w) {
  double s = 0.0;
  for (double c : w) s += c * c;
  return std::sqrt(s);
}

void validate_law(const DislocationLaw& law, int dim, double delta, const std::string& where) {
  validate_probs(law.probs, law.support.size(), where);
  for (const auto& w : law.support) {
    require(w.size() == static_cast<std::size_t>(dim), where + ": dislocation vector has wrong dimension");
    for (double c : w) require(std::isfinite(c), where + ": dislocation values must be finite");
    require(norm2(w) <= delta, where + ": dislocation exceeds delta");
  }
}

std::size_t pick(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return i;
  }
  // Last index with positive mass absorbs the rounding remainder.
  std::size_t last = probs.size() - 1;
  while (last > 0 && probs[last] == 0.0) --last;
  return last;
}

template <class Law>
const Law& lookup(const std::optional<Law>& def, const std::map<std::size_t, Law>& overrides, std::size_t site) {
  if (auto it = overrides.find(site); it != overrides.end()) return it->second;
  if (!def) fail(ErrorCode::InvalidArgument, "no scatterer distribution for site " + std::to_string(site));
  return *def;
}

void reject_unknown_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), where + " must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) ok = ok || it.key() == k;
    if (!ok) fail(ErrorCode::Config, where + ": unknown key '" + it.key() + "'");
  }
}

AmplitudeLaw amplitude_law_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"support", "probs"}, where);
  AmplitudeLaw law;
  for (const auto& v : j.at("support")) {
    if (v.is_number()) {
      law.support.emplace_back(v.get<double>(), 0.0);
    } else {
      require(v.is_array() && v.size() == 2, where + ": amplitude support entries are [re, im]");
      law.support.emplace_back(v[0].get<double>(), v[1].get<double>());
    }
  }
  law.probs = j.at("probs").get<std::vector<double>>();
  return law;
}

DislocationLaw dislocation_law_from_json(const json& j, const std::string& where) {
  reject_unknown_keys(j, {"support", "probs"}, where);
  DislocationLaw law;
  for (const auto& v : j.at("support")) {
    if (v.is_number()) {
      law.support.push_back({v.get<double>()});
    } else {
      law.support.push_back(v.get<std::vector<double>>());
    }
  }
  law.probs = j.at("probs").get<std::vector<double>>();
  return law;
}

json to_json(const AmplitudeLaw& law) {
  json support = json::array();
  for (const auto& v : law.support) support.push_back({v.real(), v.imag()});
  return {{"support", support}, {"probs", law.probs}};
}

json to_json(const DislocationLaw& law) { return {{"support", law.support}, {"probs", law.probs}}; }

}  // namespace

Complex AmplitudeLaw::mean() const {
  Complex m{0.0, 0.0};
  for (std::size_t i = 0; i < support.size(); ++i) m += probs[i] * support[i];
  return m;
}

double AmplitudeLaw::second_moment() const {
  double m = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) m += probs[i] * std::norm(support[i]);
  return m;
}

const AmplitudeLaw& AmplitudeSpec::law(std::size_t site) const { return lookup(default_law, overrides, site); }

void AmplitudeSpec::validate() const {
  require(default_law.has_value() || !overrides.empty(), "amplitude spec has no distributions");
  if (default_law) validate_law(*default_law, "default amplitude law");
  for (const auto& [site, law] : overrides) validate_law(law, "amplitude law of site " + std::to_string(site));
}

const DislocationLaw& DislocationSpec::law(std::size_t site) const { return lookup(default_law, overrides, site); }

void DislocationSpec::validate() const {
  require(dim >= 1, "dislocation dimension must be >= 1");
  require(std::isfinite(delta) && delta >= 0.0, "delta must be finite and non-negative");
  require(default_law.has_value() || !overrides.empty(), "dislocation spec has no distributions");
  if (default_law) validate_law(*default_law, dim, delta, "default dislocation law");
  for (const auto& [site, law] : overrides) {
    validate_law(law, dim, delta, "dislocation law of site " + std::to_string(site));
  }
}

Sample sample_from_indices(const ScattererSpec& spec, const PointSet& ps, std::vector<std::uint32_t> indices) {
  const std::size_t n = ps.size();
  require(indices.size() == n, "sample size must match the point set");
  Sample s;
  s.indices = std::move(indices);
  s.dim = ps.dim();
  if (const auto* a = std::get_if<AmplitudeSpec>(&spec)) {
    s.kind = Model::A;
    s.amplitudes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& law = a->law(i);
      require(s.indices[i] < law.support.size(), "support index out of range");
      s.amplitudes[i] = law.support[s.indices[i]];
    }
  } else {
    const auto& b = std::get<DislocationSpec>(spec);
    require(b.dim == ps.dim(), "dislocation dimension differs from point set dimension");
    s.kind = Model::B;
    s.dislocations.reserve(n * static_cast<std::size_t>(s.dim));
    for (std::size_t i = 0; i < n; ++i) {
      const auto& law = b.law(i);
      require(s.indices[i] < law.support.size(), "support index out of range");
      const auto& w = law.support[s.indices[i]];
      s.dislocations.insert(s.dislocations.end(), w.begin(), w.end());
    }
  }
  return s;
}

std::vector<std::uint32_t> draw_indices(const ScattererSpec& spec, std::size_t n_sites, std::uint64_t seed) {
  std::vector<std::uint32_t> idx(n_sites);
  for (std::size_t i = 0; i < n_sites; ++i) {
    const double u = to_unit(derive_seed(seed, i));
    const auto& probs = std::visit([i](const auto& sp) -> const std::vector<double>& { return sp.law(i).probs; }, spec);
    idx[i] = static_cast<std::uint32_t>(pick(probs, u));
  }
  return idx;
}

Sample sample(const ScattererSpec& spec, const PointSet& ps, std::uint64_t seed) {
  Sample s = sample_from_indices(spec, ps, draw_indices(spec, ps.size(), seed));
  s.seed = seed;
  return s;
}

AmplitudeBounds bounds_of(const AmplitudeSpec& spec) {
  double M = 0.0, B = 0.0;
  auto visit = [&](const AmplitudeLaw& law) {
    const Complex m = law.mean();
    M = std::max(M, std::abs(m));
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      if (law.probs[i] > 0.0) B = std::max(B, std::abs(law.support[i] - m));
    }
  };
  if (spec.default_law) visit(*spec.default_law);
  for (const auto& [site, law] : spec.overrides) visit(law);
  return {M, B, 2.0 * M * B + B * B};
}

double delta_of(const DislocationSpec& spec) {
  double d = 0.0;
  auto visit = [&](const DislocationLaw& law) {
    for (std::size_t i = 0; i < law.support.size(); ++i) {
      if (law.probs[i] > 0.0) d = std::max(d, norm2(law.support[i]));
    }
  };
  if (spec.default_law) visit(*spec.default_law);
  for (const auto& [site, law] : spec.overrides) visit(law);
  return d;
}

std::size_t support_size(const ScattererSpec& spec, std::size_t site) {
  return std::visit([site](const auto& sp) { return sp.law(site).probs.size(); }, spec);
}

double law_prob(const ScattererSpec& spec, std::size_t site, std::size_t index) {
  return std::visit([&](const auto& sp) { return sp.law(site).probs.at(index); }, spec);
}

bool is_deterministic(const ScattererSpec& spec, std::size_t n_sites) {
  for (std::size_t i = 0; i < n_sites; ++i) {
    std::size_t positive = 0;
    const std::size_t s = support_size(spec, i);
    for (std::size_t k = 0; k < s; ++k) positive += law_prob(spec, i, k) > 0.0 ? 1 : 0;
    if (positive > 1) return false;
  }
  return true;
}

ScattererSpec spec_from_json(const json& j) {
  try {
    require(j.is_object(), "scatterer spec must be a JSON object");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "A") {
      reject_unknown_keys(j, {"kind", "default", "overrides"}, "scatterer spec");
      AmplitudeSpec spec;
      if (j.contains("default")) spec.default_law = amplitude_law_from_json(j.at("default"), "default");
      if (j.contains("overrides")) {
        for (auto it = j.at("overrides").begin(); it != j.at("overrides").end(); ++it) {
          spec.overrides[std::stoul(it.key())] = amplitude_law_from_json(it.value(), "override " + it.key());
        }
      }
      spec.validate();
      return spec;
    }
    if (kind == "B") {
      reject_unknown_keys(j, {"kind", "default", "overrides", "delta", "dim"}, "scatterer spec");
      DislocationSpec spec;
      if (j.contains("default")) spec.default_law = dislocation_law_from_json(j.at("default"), "default");
      if (j.contains("overrides")) {
        for (auto it = j.at("overrides").begin(); it != j.at("overrides").end(); ++it) {
          spec.overrides[std::stoul(it.key())] = dislocation_law_from_json(it.value(), "override " + it.key());
        }
      }
      spec.delta = j.at("delta").get<double>();
      if (!spec.default_law && spec.overrides.empty()) fail(ErrorCode::Config, "scatterer spec has no laws");
      const DislocationLaw& any = spec.default_law ? *spec.default_law : spec.overrides.begin()->second;
      spec.dim = j.contains("dim") ? j.at("dim").get<int>()
                                   : (any.support.empty() ? 1 : static_cast<int>(any.support.front().size()));
      spec.validate();
      return spec;
    }
    fail(ErrorCode::Config, "scatterer kind must be \"A\" or \"B\"");
  } catch (const json::exception& e) {
    fail(ErrorCode::Config, std::string("scatterer spec: ") + e.what());
  } catch (const std::logic_error& e) {  // std::stoul on a bad site key
    if (dynamic_cast<const Error*>(&e) == nullptr) fail(ErrorCode::Config, std::string("scatterer spec: ") + e.what());
    throw;
  }
}

json spec_to_json(const ScattererSpec& spec) {
  json j;
  if (const auto* a = std::get_if<AmplitudeSpec>(&spec)) {
    j["kind"] = "A";
    if (a->default_law) j["default"] = to_json(*a->default_law);
    json ov = json::object();
    for (const auto& [site, law] : a->overrides) ov[std::to_string(site)] = to_json(law);
    j["overrides"] = ov;
  } else {
    const auto& b = std::get<DislocationSpec>(spec);
    j["kind"] = "B";
    j["dim"] = b.dim;
    if (b.default_law) j["default"] = to_json(*b.default_law);
    json ov = json::object();
    for (const auto& [site, law] : b.overrides) ov[std::to_string(site)] = to_json(law);
    j["overrides"] = ov;
    j["delta"] = b.delta;
  }
  return j;
}

AmplitudeSpec bernoulli_amplitudes(double plus, double minus, double p_plus) {
  AmplitudeSpec spec;
  spec.default_law = AmplitudeLaw{{Complex{plus, 0.0}, Complex{minus, 0.0}}, {p_plus, 1.0 - p_plus}};
  spec.validate();
  return spec;
}

DislocationSpec symmetric_dislocations(int dim, double delta0) {
  DislocationSpec spec;
  spec.dim = dim;
  std::vector<double> plus(static_cast<std::size_t>(dim), 0.0), minus(static_cast<std::size_t>(dim), 0.0);
  plus[0] = delta0;
  minus[0] = -delta0;
  spec.default_law = DislocationLaw{{plus, minus}, {0.5, 0.5}};
  spec.delta = std::abs(delta0);
  spec.validate();
  return spec;
}

}  // namespace rdiff
