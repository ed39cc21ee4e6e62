#include "rdiff/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include <boost/math/special_functions/beta.hpp>

#include "rdiff/error.hpp"
#include "rdiff/norms.hpp"
#include "rdiff/random.hpp"

namespace rdiff {

using nlohmann::json;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string format_key(const char* prefix, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%.6g", prefix, v);
  return buf;
}

// e^y - 1 - y - y^2/2 without cancellation for small |y|.
double exp_tail3(double y) {
  if (std::abs(y) < 1.0) {
    double term = y * y * y / 6.0, sum = 0.0;
    for (int k = 4; k < 40; ++k) {
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
      term *= y / k;
    }
    return sum;
  }
  return std::expm1(y) - y - 0.5 * y * y;
}

// log(1 + y) - y.
double log1p_minus(double y) {
  if (std::abs(y) < 0.1) {
    double pow = y * y, sum = 0.0;
    for (int k = 2; k < 60; ++k) {
      const double term = (k % 2 == 0 ? -pow : pow) / k;
      sum += term;
      if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
      pow *= y;
    }
    return sum;
  }
  return std::log1p(y) - y;
}

json json_number(double v) {
  if (std::isfinite(v)) return v;
  return v > 0 ? "inf" : (v < 0 ? "-inf" : "nan");
}

void require_real(const std::vector<Complex>& values, const char* what) {
  double scale = 1.0, worst = 0.0;
  for (const Complex& v : values) {
    scale = std::max(scale, std::abs(v.real()));
    worst = std::max(worst, std::abs(v.imag()));
  }
  if (worst > 1e-10 * scale) {
    std::ostringstream msg;
    msg << what << ": centered values are complex (imaginary part " << worst << ")";
    fail(ErrorCode::InvalidArgument, msg.str());
  }
}

// Norms needed by the large deviation bounds.
struct ScaleSet {
  std::optional<double> simple;  // K ||alpha||_{nu,a} or 4 delta ||d alpha||_{nu,a-4delta}
  std::string simple_error;
  double addition = 0.0;         // K ||alpha||_Gamma or ||alpha||_{Gamma,delta}
  json detail = json::object();
};

ScaleSet bound_scales(const PointSet& ps, const ScattererSpec& spec, const Observable& obs) {
  const MinDistance md = verify_min_distance(ps);
  require(!md.single_point, "large deviation checks need at least two points");
  const double a = md.value;
  ScaleSet out;
  out.detail["a"] = a;
  try {
    if (const auto* amp = std::get_if<AmplitudeSpec>(&spec)) {
      const AmplitudeBounds b = bounds_of(*amp);
      const double gn = gamma_norm(obs, ps).value;
      out.addition = b.K * gn;
      out.detail["K"] = b.K;
      out.detail["M"] = b.M;
      out.detail["B"] = b.B;
      out.detail["gamma_norm"] = gn;
      const NormValue sob = sobolev_norm(obs, a);
      out.detail["sobolev_norm"] = sob.value;
      out.simple = b.K * sob.value;
    } else {
      const auto& dis = std::get<DislocationSpec>(spec);
      const double semi = gamma_delta_seminorm(obs, ps, dis.delta).value;
      out.addition = semi;
      out.detail["delta"] = dis.delta;
      out.detail["seminorm"] = semi;
      if (dis.delta == 0.0) {
        out.simple = 0.0;
      } else {
        if (!(a - 4.0 * dis.delta > 0.0)) fail(ErrorCode::Domain, "simple form needs a - 4 delta > 0");
        const NormValue sd = sobolev_d_norm(obs, a - 4.0 * dis.delta);
        out.detail["sobolev_d_norm"] = sd.value;
        out.simple = 4.0 * dis.delta * sd.value;
      }
    }
  } catch (const Error& e) {
    if (e.code() != ErrorCode::InvalidArgument && e.code() != ErrorCode::Domain) throw;
    out.simple_error = e.what();
  }
  return out;
}

double bound_or_zero(double epsilon, std::size_t n, double scale, double s, Theorem which, const RateParams& p) {
  // A zero scale means the centered variable vanishes identically.
  if (scale == 0.0) return epsilon > 0.0 ? 0.0 : 2.0;
  return ld_bound({epsilon, n, scale, s}, which, p);
}

Theorem simple_of(Model m) { return m == Model::A ? Theorem::ASimple : Theorem::BSimple; }
Theorem addition_of(Model m) { return m == Model::A ? Theorem::AAddition : Theorem::BAddition; }

}  // namespace

double ExactDistribution::total_probability() const {
  CompensatedSum<double> s;
  for (const auto& o : outcomes) s.add(o.prob);
  return s.value();
}

Complex ExactDistribution::mean() const {
  CompensatedSum<Complex> s;
  for (const auto& o : outcomes) s.add(o.prob * o.value);
  return s.value();
}

double ExactDistribution::second_moment() const {
  CompensatedSum<double> s;
  for (const auto& o : outcomes) s.add(o.prob * std::norm(o.value));
  return s.value();
}

double ExactDistribution::tail(double threshold) const {
  CompensatedSum<double> s;
  for (const auto& o : outcomes) {
    if (std::abs(o.value) >= threshold) s.add(o.prob);
  }
  return std::min(1.0, s.value());
}

std::vector<double> ExactDistribution::distinct_moduli() const {
  std::vector<double> m;
  m.reserve(outcomes.size());
  for (const auto& o : outcomes) m.push_back(std::abs(o.value));
  std::sort(m.begin(), m.end());
  m.erase(std::unique(m.begin(), m.end()), m.end());
  return m;
}

ExactDistribution enumerate_exact(const PointSet& ps, const ScattererSpec& spec, const Observable& obs) {
  if (ps.size() > kMaxExactSites) {
    fail(ErrorCode::InvalidArgument, "enumeration supports at most " + std::to_string(kMaxExactSites) + " sites");
  }
  const PairTable table(ps, spec, obs);
  const std::uint64_t configs = table.configurations();
  if (configs > kMaxExactConfigurations) {
    fail(ErrorCode::InvalidArgument, "enumeration over " + std::to_string(configs) + " configurations refused");
  }
  ExactDistribution dist;
  dist.total_configs = configs;
  const std::size_t n = ps.size();
  std::vector<std::uint32_t> idx(n, 0);
  for (std::uint64_t c = 0; c < configs; ++c) {
    double p = 1.0;
    for (std::size_t x = 0; x < n; ++x) p *= table.prob(x, idx[x]);
    if (p > 0.0) dist.outcomes.push_back({p, table.centered(idx)});
    for (std::size_t x = 0; x < n; ++x) {
      if (++idx[x] < table.support(x)) break;
      idx[x] = 0;
    }
  }
  return dist;
}

void parallel_for(std::size_t n, int threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(std::max(threads, 1), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  constexpr std::size_t kChunk = 64;
  auto work = [&] {
    try {
      for (std::size_t start = next.fetch_add(kChunk); start < n; start = next.fetch_add(kChunk)) {
        const std::size_t end = std::min(n, start + kChunk);
        for (std::size_t i = start; i < end; ++i) body(i);
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
      next.store(n);
    }
  };
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (error) std::rethrow_exception(error);
}

std::vector<Complex> mc_centered(const PairTable& table, const ScattererSpec& spec, std::size_t n_samples,
                                 std::uint64_t seed, int threads) {
  std::vector<Complex> out(n_samples);
  parallel_for(n_samples, threads, [&](std::size_t k) {
    const auto idx = draw_indices(spec, table.size(), derive_seed(seed, k));
    out[k] = table.centered(idx);
  });
  return out;
}

TailEstimate clopper_pearson(std::size_t hits, std::size_t n, double confidence) {
  require(n > 0 && hits <= n, "invalid binomial counts");
  require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  const double alpha = 1.0 - confidence;
  TailEstimate t;
  t.hits = hits;
  t.n = n;
  t.p_hat = static_cast<double>(hits) / static_cast<double>(n);
  const auto h = static_cast<double>(hits), m = static_cast<double>(n - hits);
  t.ci_low = hits == 0 ? 0.0 : boost::math::ibeta_inv(h, m + 1.0, 0.5 * alpha);
  t.ci_high = hits == n ? 1.0 : boost::math::ibeta_inv(h + 1.0, m, 1.0 - 0.5 * alpha);
  return t;
}

TailEstimate tail_from_samples(const std::vector<Complex>& samples, double threshold) {
  std::size_t hits = 0;
  for (const Complex& v : samples) hits += std::abs(v) >= threshold ? 1 : 0;
  return clopper_pearson(hits, samples.size());
}

TailEstimate mc_tail(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, double epsilon,
                     std::size_t n_samples, std::uint64_t seed, int threads) {
  require(n_samples >= 100, "mc_tail needs at least 100 samples");
  require(epsilon >= 0.0, "epsilon must be non-negative");
  const PairTable table(ps, spec, obs);
  const auto samples = mc_centered(table, spec, n_samples, seed, threads);
  return tail_from_samples(samples, epsilon * static_cast<double>(ps.size()));
}

bool ExperimentReport::pass() const {
  for (const auto& [name, v] : verdicts.items()) {
    if (!v.get<bool>()) return false;
  }
  return true;
}

void ExperimentReport::verdict(const std::string& name, json empirical_value, json theoretical_value, bool ok) {
  empirical[name] = std::move(empirical_value);
  theoretical[name] = std::move(theoretical_value);
  verdicts[name] = ok;
}

json ExperimentReport::to_json(bool include_runtime) const {
  json j{{"config", config},   {"empirical", empirical}, {"theoretical", theoretical},
         {"verdicts", verdicts}, {"seed", seed},         {"pass", pass()}};
  if (include_runtime) j["runtime_seconds"] = runtime_seconds;
  return j;
}

LdResult verify_ld_bound(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, const LdOptions& opt) {
  const auto start = Clock::now();
  const Model model = model_of(spec);
  const bool selected_simple = opt.which == Theorem::ASimple || opt.which == Theorem::BSimple;
  require((opt.which == simple_of(model)) || (opt.which == addition_of(model)),
          "theorem selector " + to_string(opt.which) + " does not match the scatterer model");
  require(!opt.epsilons.empty(), "at least one epsilon is required");
  for (double e : opt.epsilons) require(e > 0.0 && std::isfinite(e), "epsilons must be positive");

  LdResult out;
  ExperimentReport& rep = out.report;
  rep.seed = opt.seed;
  rep.config = {{"epsilons", opt.epsilons},  {"n_samples", opt.n_samples},
                {"theorem", to_string(opt.which)}, {"confidence", opt.confidence},
                {"d", opt.params.d_eval()},  {"D", opt.params.D},
                {"D_tilde", opt.params.D_tilde}};

  const std::size_t n = ps.size();
  const ScaleSet scales = bound_scales(ps, spec, obs);
  if (selected_simple && !scales.simple) {
    fail(ErrorCode::InvalidArgument, "simple-form norm unavailable: " + scales.simple_error);
  }
  const CenteredStats stats = exact_variance(ps, spec, obs, VariancePath::Hoeffding);
  // s_r uses the addition scale, which is exactly the CenteredStats scale.
  const double s = stats.normalized;
  const double s_used = std::min(s, 4.0);
  json norms = scales.detail;
  norms["addition_scale"] = scales.addition;
  if (scales.simple) norms["simple_scale"] = *scales.simple;
  else norms["simple_unavailable"] = scales.simple_error;
  rep.empirical["norms"] = norms;
  rep.empirical["variance"] = stats.variance;
  rep.verdict("normalized_variance", s, 4.0, s <= 4.0 + 1e-12);

  const PairTable table(ps, spec, obs);
  out.samples = mc_centered(table, spec, opt.n_samples, opt.seed, opt.threads);

  std::optional<ExactDistribution> exact;
  if (n <= kMaxExactSites && table.configurations() <= kMaxExactConfigurations) exact = enumerate_exact(ps, spec, obs);

  auto bounds_at = [&](double eps) {
    const double add = bound_or_zero(eps, n, scales.addition, s_used, addition_of(model), opt.params);
    const double simple =
        scales.simple ? bound_or_zero(eps, n, *scales.simple, 4.0, simple_of(model), opt.params) : 2.0;
    return std::pair{simple, add};
  };

  bool addition_le_simple = true;
  for (double eps : opt.epsilons) {
    const auto [simple, add] = bounds_at(eps);
    const double threshold = eps * static_cast<double>(n);
    TailEstimate t = tail_from_samples(out.samples, threshold);
    t = clopper_pearson(t.hits, t.n, opt.confidence);
    json emp{{"hits", t.hits}, {"p_hat", t.p_hat}, {"ci_low", t.ci_low}, {"ci_high", t.ci_high}};
    json th{{"addition", add}};
    if (scales.simple) th["simple"] = simple;
    const double selected = selected_simple ? simple : add;
    th["selected"] = selected;
    bool ok = t.ci_low <= std::min(simple, add);
    if (exact) {
      const double e = exact->tail(threshold);
      emp["exact"] = e;
      ok = ok && e <= std::min(simple, add);
    }
    if (scales.simple && s <= 4.0 && add > simple * (1.0 + 1e-12)) addition_le_simple = false;
    rep.verdict(format_key("tail@eps=", eps), emp, th, ok);
  }
  if (scales.simple) {
    rep.verdict("addition_le_simple", json{{"normalized_variance", s}}, json{{"required_when_s_le", 4.0}},
                addition_le_simple);
  }

  if (exact) {
    // The exact tail is a step function with jumps at the outcome moduli and the bound is
    // non-increasing in epsilon, so checking at every modulus covers all epsilon > 0.
    double worst = -2.0, worst_eps = 0.0;
    std::size_t checked = 0;
    for (double m : exact->distinct_moduli()) {
      if (m <= 0.0) continue;
      const double eps = m / static_cast<double>(n);
      const auto [simple, add] = bounds_at(eps);
      const double excess = exact->tail(m) - std::min(simple, add);
      ++checked;
      if (excess > worst) {
        worst = excess;
        worst_eps = eps;
      }
    }
    rep.verdict("exact_tail_all_eps", json{{"max_excess", worst}, {"at_eps", worst_eps}, {"points", checked}},
                json{{"max_excess_allowed", 0.0}}, worst <= 0.0);
  }
  rep.runtime_seconds = seconds_since(start);
  return out;
}

double laplace_gap(const ExactDistribution& dist, double c) {
  CompensatedSum<double> ey, m2, g3;
  for (const auto& o : dist.outcomes) {
    const double y = c * o.value.real();
    ey.add(o.prob * y);
    m2.add(o.prob * y * y);
    g3.add(o.prob * exp_tail3(y));
  }
  const double z = ey.value() + 0.5 * m2.value() + g3.value();
  return ey.value() + g3.value() + log1p_minus(z);
}

ExperimentReport verify_laplace_gap(const PointSet& ps, const ScattererSpec& spec, const Observable& obs,
                                    const LaplaceOptions& opt) {
  const auto start = Clock::now();
  require(!opt.scales.empty(), "at least one scale is required");
  const Model model = model_of(spec);
  const std::size_t n = ps.size();
  ExperimentReport rep;
  rep.config = {{"scales", opt.scales},
                {"slope_decades", opt.slope_decades},
                {"min_slope", opt.min_slope},
                {"d", opt.params.d_eval()},
                {"D", opt.params.D},
                {"D_tilde", opt.params.D_tilde}};
  const double base = normalization_scale(ps, spec, obs);
  const double d = opt.params.d_eval();
  for (double c : opt.scales) {
    require(c >= 0.0 && std::isfinite(c), "scales must be finite and non-negative");
    if (c * base > d * (1.0 + 1e-12)) {
      std::ostringstream msg;
      msg << "scale multiplier " << c << " gives " << c * base << " > d = " << d;
      fail(ErrorCode::Domain, msg.str());
    }
  }
  const ExactDistribution dist = enumerate_exact(ps, spec, obs);
  {
    std::vector<Complex> values;
    values.reserve(dist.outcomes.size());
    for (const auto& o : dist.outcomes) values.push_back(o.value);
    require_real(values, "laplace gap");
  }
  rep.empirical["base_scale"] = base;
  rep.empirical["configurations"] = dist.total_configs;

  for (double c : opt.scales) {
    const double scale = std::min(c * base, d);
    const double gap = laplace_gap(dist, c);
    const double bound = laplace_gap_bound(n, scale, model, opt.params);
    rep.verdict(format_key("gap@c=", c), json{{"gap", gap}, {"scale", scale}}, json{{"bound", bound}},
                std::abs(gap) <= bound);
  }

  const double c_top = *std::max_element(opt.scales.begin(), opt.scales.end());
  if (c_top > 0.0 && base > 0.0) {
    const double c_low = c_top * std::pow(10.0, -opt.slope_decades);
    const double g_top = std::abs(laplace_gap(dist, c_top));
    const double g_low = std::abs(laplace_gap(dist, c_low));
    double slope = std::numeric_limits<double>::infinity();
    if (g_top == 0.0 && g_low == 0.0) slope = std::numeric_limits<double>::infinity();
    else if (g_low > 0.0 && g_top > 0.0) slope = std::log(g_top / g_low) / std::log(c_top / c_low);
    else if (g_top == 0.0) slope = -std::numeric_limits<double>::infinity();
    rep.verdict("cubic_slope",
                json{{"slope", json_number(slope)}, {"gap_top", g_top}, {"gap_low", g_low}, {"c_top", c_top},
                     {"c_low", c_low}},
                json{{"min_slope", opt.min_slope}}, slope >= opt.min_slope);
  }
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

double ks_distance_normal(std::vector<double> z) {
  require(!z.empty(), "KS distance needs samples");
  std::sort(z.begin(), z.end());
  const auto n = static_cast<double>(z.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double cdf = 0.5 * std::erfc(-z[i] / std::numbers::sqrt2);
    worst = std::max({worst, (static_cast<double>(i) + 1.0) / n - cdf, cdf - static_cast<double>(i) / n});
  }
  return worst;
}

CltResult clt_experiment(const PointSet& ps, const ScattererSpec& spec, const Observable& obs, const CltOptions& opt) {
  const auto start = Clock::now();
  require(opt.n_samples >= 2, "the CLT experiment needs at least two samples");
  const PairTable table(ps, spec, obs);
  const double var = table.variance_hoeffding();
  if (!(var > 0.0)) fail(ErrorCode::InvalidArgument, "zero-variance spec: the CLT experiment is undefined");
  CltResult out;
  out.samples = mc_centered(table, spec, opt.n_samples, opt.seed, opt.threads);
  require_real(out.samples, "CLT experiment");

  const double sd = std::sqrt(var);
  std::vector<double> z(out.samples.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = out.samples[i].real() / sd;
  CompensatedSum<double> s1;
  for (double v : z) s1.add(v);
  const auto m = static_cast<double>(z.size());
  const double mean = s1.value() / m;
  CompensatedSum<double> c2, c3, c4;
  for (double v : z) {
    const double u = v - mean;
    c2.add(u * u);
    c3.add(u * u * u);
    c4.add(u * u * u * u);
  }
  const double m2 = c2.value() / m, m3 = c3.value() / m, m4 = c4.value() / m;
  out.skewness = m3 / std::pow(m2, 1.5);
  out.kurtosis = m4 / (m2 * m2);
  out.ks = ks_distance_normal(z);

  ExperimentReport& rep = out.report;
  rep.seed = opt.seed;
  rep.config = {{"n_samples", opt.n_samples},
                {"ks_threshold", opt.ks_threshold},
                {"skew_threshold", opt.skew_threshold},
                {"kurtosis_threshold", opt.kurtosis_threshold}};
  rep.empirical["exact_variance"] = var;
  rep.empirical["sample_mean"] = mean;
  rep.empirical["sample_variance"] = m2;
  rep.empirical["variance_growth_ratio"] = var * std::pow(static_cast<double>(ps.size()), -2.0 / 3.0);
  rep.verdict("ks", out.ks, opt.ks_threshold, out.ks <= opt.ks_threshold);
  rep.verdict("skewness", out.skewness, opt.skew_threshold, std::abs(out.skewness) <= opt.skew_threshold);
  rep.verdict("kurtosis", out.kurtosis, json{{"target", 3.0}, {"tolerance", opt.kurtosis_threshold}},
              std::abs(out.kurtosis - 3.0) <= opt.kurtosis_threshold);
  rep.runtime_seconds = seconds_since(start);
  return out;
}

ExperimentReport verify_variance_growth(const std::vector<PointSet>& sets, const ScattererSpec& spec,
                                        const Observable& obs) {
  const auto start = Clock::now();
  require(sets.size() >= 2, "variance growth needs at least two volumes");
  ExperimentReport rep;
  json sizes = json::array(), ratios = json::array(), normalized = json::array(), variances = json::array();
  bool increasing = true, bounded = true;
  double prev = -1.0, s_min = std::numeric_limits<double>::infinity(), s_max = 0.0;
  for (const auto& ps : sets) {
    const CenteredStats st = exact_variance(ps, spec, obs, VariancePath::Hoeffding);
    const double ratio = st.variance * std::pow(static_cast<double>(ps.size()), -2.0 / 3.0);
    sizes.push_back(ps.size());
    variances.push_back(st.variance);
    ratios.push_back(ratio);
    normalized.push_back(st.normalized);
    increasing = increasing && ratio > prev;
    bounded = bounded && st.normalized <= 4.0 + 1e-12;
    prev = ratio;
    s_min = std::min(s_min, st.normalized);
    s_max = std::max(s_max, st.normalized);
  }
  rep.empirical["sizes"] = sizes;
  rep.empirical["variance"] = variances;
  rep.verdict("ratio_increasing", ratios, "strictly increasing", increasing);
  const double spread = s_max > 0.0 ? (s_max - s_min) / s_max : 0.0;
  rep.verdict("normalized_stable", json{{"values", normalized}, {"relative_spread", spread}},
              json{{"max_relative_spread", 0.1}}, spread <= 0.1);
  rep.verdict("normalized_le_4", normalized, 4.0, bounded);
  rep.runtime_seconds = seconds_since(start);
  return rep;
}

}  // namespace rdiff
