#include "rdiff/commands.hpp"

#include <chrono>
#include <cstdio>
#include <set>

#include "rdiff/correlation.hpp"
#include "rdiff/error.hpp"
#include "rdiff/experiments.hpp"
#include "rdiff/norms.hpp"
#include "rdiff/observables.hpp"
#include "rdiff/rates.hpp"
#include "rdiff/scatterers.hpp"

namespace rdiff {

using nlohmann::json;

namespace {

// Strict accessor over a JSON object: every key must be consumed.
class Fields {
 public:
  Fields(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::Config, where_ + " must be a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const json& raw(const std::string& key) {
    if (!has(key)) fail(ErrorCode::Config, where_ + ": missing key '" + key + "'");
    return j_.at(key);
  }

  template <class T>
  T get(const std::string& key) {
    try {
      return raw(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, where_ + "." + key + ": " + e.what());
    }
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    return has(key) ? get<T>(key) : fallback;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(ErrorCode::Config, where_ + ": unknown key '" + it.key() + "'");
    }
  }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

// Re-tags argument errors raised while building objects from config values.
template <class F>
auto as_config(const std::string& where, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) fail(ErrorCode::Config, where + ": " + e.what());
    throw;
  }
}

std::string samples_csv(const std::vector<Complex>& samples) {
  std::string out = "index,x_real,x_imag\n";
  char buf[96];
  for (std::size_t i = 0; i < samples.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", i, samples[i].real(), samples[i].imag());
    out += buf;
  }
  return out;
}

struct Instance {
  PointSet ps;
  ScattererSpec spec;
  Observable obs;
  json resolved;
};

Instance parse_instance(Fields& f, std::uint64_t seed) {
  auto [ps, ps_json] = pointset_from_json(f.raw("pointset"), seed);
  ScattererSpec spec = spec_from_json(f.raw("scatterers"));
  as_config("scatterers", [&] {
    std::visit([](const auto& s) { s.validate(); }, spec);
    for (std::size_t i = 0; i < ps.size(); ++i) (void)support_size(spec, i);
    if (const auto* b = std::get_if<DislocationSpec>(&spec)) {
      require(b->dim == ps.dim(), "dislocation dimension differs from point set dimension");
    }
    return 0;
  });
  Observable obs = observable_from_json(f.raw("observable"), ps.dim());
  json resolved{{"pointset", ps_json}, {"scatterers", spec_to_json(spec)}, {"observable", f.raw("observable")}};
  return {std::move(ps), std::move(spec), std::move(obs), std::move(resolved)};
}

RateParams parse_params(Fields& f, json& resolved) {
  const bool precise = f.get<bool>("precise_constants", false);
  resolved["precise_constants"] = precise;
  return precise ? RateParams::precise() : RateParams::published();
}

CommandResult finish(ExperimentReport rep, json resolved, std::uint64_t seed, const CommandOptions& opt,
                     std::vector<std::pair<std::string, std::string>> extra = {}) {
  resolved["seed"] = seed;
  json cfg = std::move(resolved);
  for (auto& [k, v] : rep.config.items()) {
    if (!cfg.contains(k)) cfg[k] = v;
  }
  rep.config = std::move(cfg);
  rep.seed = seed;
  CommandResult out;
  out.report = rep.to_json(opt.timestamps);
  out.pass = rep.pass();
  out.files.emplace_back("report.json", out.report.dump(2) + "\n");
  for (auto& e : extra) out.files.push_back(std::move(e));
  for (const auto& [name, ok] : rep.verdicts.items()) {
    out.text += (ok.get<bool>() ? "PASS " : "FAIL ") + name + "\n";
  }
  return out;
}

CommandResult cmd_gen_pointset(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  Fields f(config, "config");
  auto [ps, ps_json] = pointset_from_json(f.raw("pointset"), seed);
  f.has("seed");
  f.finish();
  ExperimentReport rep;
  const MinDistance md = verify_min_distance(ps);
  rep.empirical["size"] = ps.size();
  if (md.single_point) {
    rep.verdict("min_distance", "single point", ps.min_dist(), true);
  } else {
    rep.verdict("min_distance", md.value, ps.min_dist(), md.value >= ps.min_dist());
  }
  return finish(std::move(rep), json{{"pointset", ps_json}}, seed, opt, {{"points.csv", ps.to_csv()}});
}

CommandResult cmd_constants(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  json resolved = json::object();
  RateParams p = RateParams::published();
  if (!config.is_null()) {
    Fields f(config, "config");
    p = parse_params(f, resolved);
    f.has("seed");
    f.finish();
  } else {
    resolved["precise_constants"] = false;
  }
  const auto start = std::chrono::steady_clock::now();
  const ConstantsReport c = recompute_constants(p);
  ExperimentReport rep;
  rep.empirical["table"] = to_json(c);
  rep.verdict("D_dominated", std::max(c.D, c.D_at_rounded), p.D, std::max(c.D, c.D_at_rounded) <= p.D);
  rep.verdict("D_tilde_dominated", std::max(c.D_tilde, c.D_tilde_at_rounded), p.D_tilde,
              std::max(c.D_tilde, c.D_tilde_at_rounded) <= p.D_tilde);
  rep.verdict("D_monotone", c.D_monotone, true, c.D_monotone);
  rep.verdict("D_tilde_monotone", c.D_tilde_monotone, true, c.D_tilde_monotone);
  rep.verdict("D_budget", json{{"leading", c.D_terms.leading}, {"middle", c.D_terms.middle}, {"last", c.D_terms.last}},
              json{{"leading", 4352}, {"middle", 63}, {"last", 124}}, c.D_within_budget);
  rep.verdict("D_tilde_budget",
              json{{"leading", c.D_tilde_terms.leading}, {"middle", c.D_tilde_terms.middle},
                   {"last", c.D_tilde_terms.last}},
              json{{"leading", 4352}, {"middle", 10}, {"last", 12}}, c.D_tilde_within_budget);
  rep.runtime_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  CommandResult out = finish(std::move(rep), resolved, seed, opt);
  out.text = to_text(c) + out.text;
  return out;
}

CommandResult cmd_run_ld(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  Fields f(config, "config");
  Instance inst = parse_instance(f, seed);
  json resolved = inst.resolved;
  LdOptions ld;
  ld.epsilons = f.get<std::vector<double>>("epsilons");
  ld.n_samples = f.get<std::size_t>("n_samples", 10000);
  ld.confidence = f.get<double>("confidence", 0.99);
  const Model model = model_of(inst.spec);
  const std::string default_theorem = to_string(model == Model::A ? Theorem::ASimple : Theorem::BSimple);
  ld.which = theorem_from_string(f.get<std::string>("theorem", default_theorem));
  ld.params = parse_params(f, resolved);
  ld.seed = seed;
  ld.threads = opt.threads;
  f.has("seed");
  f.finish();
  if (ld.n_samples < 100) fail(ErrorCode::Config, "n_samples must be at least 100");
  resolved["epsilons"] = ld.epsilons;
  resolved["n_samples"] = ld.n_samples;
  resolved["confidence"] = ld.confidence;
  resolved["theorem"] = to_string(ld.which);
  auto result = as_config("run-ld", [&] { return verify_ld_bound(inst.ps, inst.spec, inst.obs, ld); });
  return finish(std::move(result.report), resolved, seed, opt, {{"samples.csv", samples_csv(result.samples)}});
}

CommandResult cmd_run_clt(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  Fields f(config, "config");
  Instance inst = parse_instance(f, seed);
  json resolved = inst.resolved;
  CltOptions clt;
  clt.n_samples = f.get<std::size_t>("n_samples", 10000);
  clt.ks_threshold = f.get<double>("ks_threshold", 0.02);
  clt.skew_threshold = f.get<double>("skew_threshold", 0.1);
  clt.kurtosis_threshold = f.get<double>("kurtosis_threshold", 0.3);
  clt.seed = seed;
  clt.threads = opt.threads;
  f.has("seed");
  f.finish();
  resolved["n_samples"] = clt.n_samples;
  resolved["ks_threshold"] = clt.ks_threshold;
  resolved["skew_threshold"] = clt.skew_threshold;
  resolved["kurtosis_threshold"] = clt.kurtosis_threshold;
  auto result = as_config("run-clt", [&] { return clt_experiment(inst.ps, inst.spec, inst.obs, clt); });
  return finish(std::move(result.report), resolved, seed, opt, {{"samples.csv", samples_csv(result.samples)}});
}

CommandResult cmd_verify_norms(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  Fields f(config, "config");
  const json& sets = f.raw("pointsets");
  if (!sets.is_array() || sets.empty()) fail(ErrorCode::Config, "pointsets must be a non-empty array");
  const auto sigmas = f.get<std::vector<double>>("sigmas");
  const auto deltas = f.get<std::vector<double>>("deltas", {});
  const double slack = f.get<double>("slack", 1e-8);
  f.has("seed");
  f.finish();
  for (double s : sigmas) {
    if (!(s > 0.0)) fail(ErrorCode::Config, "sigmas must be positive");
  }
  for (double d : deltas) {
    if (!(d >= 0.0)) fail(ErrorCode::Config, "deltas must be non-negative");
  }
  std::vector<PointSet> parsed;
  json resolved_sets = json::array();
  for (const auto& s : sets) {
    auto [ps, js] = pointset_from_json(s, seed);
    if (ps.dim() != 1 && ps.dim() != 2) fail(ErrorCode::Config, "norm checks support dimensions 1 and 2");
    parsed.push_back(std::move(ps));
    resolved_sets.push_back(std::move(js));
  }
  ExperimentReport rep;
  json skipped = json::array();
  char name[160];
  for (std::size_t i = 0; i < parsed.size(); ++i) {
    const PointSet& ps = parsed[i];
    for (double sigma : sigmas) {
      const Observable obs = gaussian(ps.dim(), sigma);
      const NormCheck c3 = check_gamma_domination(obs, ps, slack);
      std::snprintf(name, sizeof name, "gamma_domination[set=%zu,sigma=%.6g]", i, sigma);
      rep.verdict(name, c3.lhs, to_json(c3), c3.pass);
      for (double delta : deltas) {
        std::snprintf(name, sizeof name, "seminorm_domination[set=%zu,sigma=%.6g,delta=%.6g]", i, sigma, delta);
        const MinDistance md = verify_min_distance(ps);
        if (!md.single_point && !(md.value - 4.0 * delta > 0.0)) {
          skipped.push_back(name);
          continue;
        }
        const NormCheck c4 = check_seminorm_domination(obs, ps, delta, slack);
        rep.verdict(name, c4.lhs, to_json(c4), c4.pass && c4.secondary_pass.value_or(true));
      }
    }
  }
  rep.empirical["skipped_a_minus_4delta_nonpositive"] = skipped;
  json resolved{{"pointsets", resolved_sets}, {"sigmas", sigmas}, {"deltas", deltas}, {"slack", slack}};
  return finish(std::move(rep), resolved, seed, opt);
}

CommandResult cmd_verify_laplace(const json& config, std::uint64_t seed, const CommandOptions& opt) {
  Fields f(config, "config");
  Instance inst = parse_instance(f, seed);
  json resolved = inst.resolved;
  const auto fractions = f.get<std::vector<double>>("scale_fractions", {1.0, 0.5, 0.25, 0.125});
  LaplaceOptions lo;
  lo.slope_decades = f.get<double>("slope_decades", 2.0);
  lo.min_slope = f.get<double>("min_slope", 2.9);
  lo.params = parse_params(f, resolved);
  f.has("seed");
  f.finish();
  if (fractions.empty()) fail(ErrorCode::Config, "scale_fractions must be non-empty");
  for (double fr : fractions) {
    if (!(fr >= 0.0 && fr <= 1.0)) fail(ErrorCode::Config, "scale_fractions must lie in [0, 1]");
  }
  resolved["scale_fractions"] = fractions;
  resolved["slope_decades"] = lo.slope_decades;
  resolved["min_slope"] = lo.min_slope;
  auto rep = as_config("verify-laplace", [&] {
    const double base = normalization_scale(inst.ps, inst.spec, inst.obs);
    require(base > 0.0, "observable has zero normalization scale");
    for (double fr : fractions) lo.scales.push_back(fr * lo.params.d_eval() / base);
    return verify_laplace_gap(inst.ps, inst.spec, inst.obs, lo);
  });
  return finish(std::move(rep), resolved, seed, opt);
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"gen-pointset", "constants",    "run-ld",
                                              "run-clt",      "verify-norms", "verify-laplace"};
  return names;
}

std::pair<PointSet, json> pointset_from_json(const json& j, std::uint64_t default_seed) {
  Fields f(j, "pointset");
  const auto gen = f.get<std::string>("generator");
  return as_config("pointset", [&]() -> std::pair<PointSet, json> {
    if (gen == "lattice") {
      const int dim = f.get<int>("dim");
      const double spacing = f.get<double>("spacing", 1.0);
      const double radius = f.get<double>("radius");
      f.finish();
      return {lattice(dim, spacing, radius), {{"generator", gen}, {"dim", dim}, {"spacing", spacing}, {"radius", radius}}};
    }
    if (gen == "fibonacci") {
      const int n = f.get<int>("n_points");
      const double short_len = f.get<double>("short_len", 1.0);
      f.finish();
      return {fibonacci_chain(n, short_len), {{"generator", gen}, {"n_points", n}, {"short_len", short_len}}};
    }
    if (gen == "hardcore") {
      const int dim = f.get<int>("dim");
      const double min_dist = f.get<double>("min_dist");
      const double radius = f.get<double>("radius");
      const auto seed = f.get<std::uint64_t>("seed", default_seed);
      f.finish();
      return {hardcore_random(dim, min_dist, radius, seed),
              {{"generator", gen}, {"dim", dim}, {"min_dist", min_dist}, {"radius", radius}, {"seed", seed}}};
    }
    if (gen == "points") {
      const int dim = f.get<int>("dim");
      const double min_dist = f.get<double>("min_dist");
      const auto pts = f.get<std::vector<std::vector<double>>>("points");
      const auto label = f.get<std::string>("label", "points");
      f.finish();
      std::vector<double> coords;
      for (const auto& p : pts) {
        require(static_cast<int>(p.size()) == dim, "every point needs dim coordinates");
        coords.insert(coords.end(), p.begin(), p.end());
      }
      return {PointSet(dim, coords, min_dist, label),
              {{"generator", gen}, {"dim", dim}, {"min_dist", min_dist}, {"points", pts}, {"label", label}}};
    }
    fail(ErrorCode::Config, "unknown point set generator '" + gen + "'");
  });
}

CommandResult run_command(const std::string& command, const json& config, const CommandOptions& opt) {
  std::uint64_t seed = 0;
  if (config.is_object() && config.contains("seed")) {
    try {
      seed = config.at("seed").get<std::uint64_t>();
    } catch (const json::exception& e) {
      fail(ErrorCode::Config, std::string("config.seed: ") + e.what());
    }
  }
  if (opt.seed) seed = *opt.seed;
  if (command == "constants") return cmd_constants(config, seed, opt);
  if (!config.is_object()) fail(ErrorCode::Config, "command '" + command + "' needs a JSON object config");
  if (command == "gen-pointset") return cmd_gen_pointset(config, seed, opt);
  if (command == "run-ld") return cmd_run_ld(config, seed, opt);
  if (command == "run-clt") return cmd_run_clt(config, seed, opt);
  if (command == "verify-norms") return cmd_verify_norms(config, seed, opt);
  if (command == "verify-laplace") return cmd_verify_laplace(config, seed, opt);
  fail(ErrorCode::Config, "unknown command '" + command + "'");
}

}  // namespace rdiff
