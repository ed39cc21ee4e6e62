#include "rdiff/rdiff.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <new>
#include <string>

#include <nlohmann/json.hpp>

#include "rdiff/commands.hpp"
#include "rdiff/correlation.hpp"
#include "rdiff/error.hpp"
#include "rdiff/norms.hpp"
#include "rdiff/observables.hpp"
#include "rdiff/pointset.hpp"
#include "rdiff/rates.hpp"
#include "rdiff/scatterers.hpp"

struct rdiff_pointset {
  rdiff::PointSet value;
};

struct rdiff_spec {
  rdiff::ScattererSpec value;
};

struct rdiff_observable {
  rdiff::Observable value;
};

namespace {

thread_local std::string last_error;

rdiff_status to_status(rdiff::ErrorCode c) {
  switch (c) {
    case rdiff::ErrorCode::InvalidArgument: return RDIFF_E_INVALID_ARGUMENT;
    case rdiff::ErrorCode::Domain: return RDIFF_E_DOMAIN;
    case rdiff::ErrorCode::Numeric: return RDIFF_E_NUMERIC;
    case rdiff::ErrorCode::Io: return RDIFF_E_IO;
    case rdiff::ErrorCode::Config: return RDIFF_E_CONFIG;
    case rdiff::ErrorCode::Internal: return RDIFF_E_INTERNAL;
  }
  return RDIFF_E_INTERNAL;
}

template <class F>
rdiff_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return RDIFF_OK;
  } catch (const rdiff::Error& e) {
    last_error = e.what();
    return to_status(e.code());
  } catch (const nlohmann::json::exception& e) {
    last_error = e.what();
    return RDIFF_E_CONFIG;
  } catch (const std::bad_alloc&) {
    last_error = "out of memory";
    return RDIFF_E_INTERNAL;
  } catch (const std::exception& e) {
    last_error = e.what();
    return RDIFF_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  if (!p) rdiff::fail(rdiff::ErrorCode::InvalidArgument, std::string(what) + " must not be NULL");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

rdiff::RateParams params_of(int precise) {
  return precise ? rdiff::RateParams::precise() : rdiff::RateParams::published();
}

template <class T, class... Args>
void emit(T** out, Args&&... args) {
  need(out, "out");
  *out = new T{std::forward<Args>(args)...};
}

}  // namespace

extern "C" {

const char* rdiff_last_error(void) { return last_error.c_str(); }

void rdiff_string_free(char* s) { std::free(s); }

rdiff_status rdiff_pointset_lattice(int dim, double spacing, double radius, rdiff_pointset** out) {
  return guarded([&] { emit(out, rdiff::lattice(dim, spacing, radius)); });
}

rdiff_status rdiff_pointset_fibonacci(int n_points, double short_len, rdiff_pointset** out) {
  return guarded([&] { emit(out, rdiff::fibonacci_chain(n_points, short_len)); });
}

rdiff_status rdiff_pointset_hardcore(int dim, double min_dist, double radius, uint64_t seed, rdiff_pointset** out) {
  return guarded([&] { emit(out, rdiff::hardcore_random(dim, min_dist, radius, seed)); });
}

rdiff_status rdiff_pointset_from_coords(int dim, const double* coords, size_t n_points, double min_dist,
                                        rdiff_pointset** out) {
  return guarded([&] {
    need(coords, "coords");
    rdiff::require(dim >= 1, "dimension must be positive");
    std::vector<double> c(coords, coords + n_points * static_cast<size_t>(dim));
    emit(out, rdiff::PointSet(dim, std::move(c), min_dist, "c-api"));
  });
}

rdiff_status rdiff_pointset_from_csv(const char* text, rdiff_pointset** out) {
  return guarded([&] {
    need(text, "text");
    emit(out, rdiff::PointSet::from_csv(text));
  });
}

void rdiff_pointset_free(rdiff_pointset* ps) { delete ps; }

size_t rdiff_pointset_size(const rdiff_pointset* ps) { return ps ? ps->value.size() : 0; }

int rdiff_pointset_dim(const rdiff_pointset* ps) { return ps ? ps->value.dim() : 0; }

rdiff_status rdiff_pointset_coords(const rdiff_pointset* ps, double* out, size_t capacity) {
  return guarded([&] {
    need(ps, "ps");
    need(out, "out");
    const auto c = ps->value.coords();
    rdiff::require(capacity >= c.size(), "output buffer too small");
    std::copy(c.begin(), c.end(), out);
  });
}

rdiff_status rdiff_pointset_min_distance(const rdiff_pointset* ps, double* value, int* single_point) {
  return guarded([&] {
    need(ps, "ps");
    need(value, "value");
    const auto md = rdiff::verify_min_distance(ps->value);
    *value = md.value;
    if (single_point) *single_point = md.single_point ? 1 : 0;
  });
}

rdiff_status rdiff_pointset_to_csv(const rdiff_pointset* ps, char** out) {
  return guarded([&] {
    need(ps, "ps");
    need(out, "out");
    *out = dup_string(ps->value.to_csv());
  });
}

rdiff_status rdiff_spec_from_json(const char* json, rdiff_spec** out) {
  return guarded([&] {
    need(json, "json");
    auto j = nlohmann::json::parse(json);
    auto spec = rdiff::spec_from_json(j);
    std::visit([](const auto& s) { s.validate(); }, spec);
    emit(out, std::move(spec));
  });
}

rdiff_status rdiff_spec_bernoulli(double plus, double minus, double p_plus, rdiff_spec** out) {
  return guarded([&] { emit(out, rdiff::ScattererSpec{rdiff::bernoulli_amplitudes(plus, minus, p_plus)}); });
}

rdiff_status rdiff_spec_symmetric_dislocations(int dim, double delta0, rdiff_spec** out) {
  return guarded([&] { emit(out, rdiff::ScattererSpec{rdiff::symmetric_dislocations(dim, delta0)}); });
}

void rdiff_spec_free(rdiff_spec* spec) { delete spec; }

rdiff_model rdiff_spec_model(const rdiff_spec* spec) {
  return spec && rdiff::model_of(spec->value) == rdiff::Model::B ? RDIFF_MODEL_B : RDIFF_MODEL_A;
}

rdiff_status rdiff_observable_gaussian(int dim, double sigma, rdiff_observable** out) {
  return guarded([&] { emit(out, rdiff::gaussian(dim, sigma)); });
}

void rdiff_observable_free(rdiff_observable* obs) { delete obs; }

rdiff_status rdiff_gamma_norm(const rdiff_observable* obs, const rdiff_pointset* ps, double* out) {
  return guarded([&] {
    need(obs, "obs");
    need(ps, "ps");
    need(out, "out");
    *out = rdiff::gamma_norm(obs->value, ps->value).value;
  });
}

rdiff_status rdiff_gamma_delta_seminorm(const rdiff_observable* obs, const rdiff_pointset* ps, double delta,
                                        double* out) {
  return guarded([&] {
    need(obs, "obs");
    need(ps, "ps");
    need(out, "out");
    *out = rdiff::gamma_delta_seminorm(obs->value, ps->value, delta).value;
  });
}

rdiff_status rdiff_sobolev_norm(const rdiff_observable* obs, double a, double* out) {
  return guarded([&] {
    need(obs, "obs");
    need(out, "out");
    *out = rdiff::sobolev_norm(obs->value, a).value;
  });
}

rdiff_status rdiff_sobolev_d_norm(const rdiff_observable* obs, double a, double* out) {
  return guarded([&] {
    need(obs, "obs");
    need(out, "out");
    *out = rdiff::sobolev_d_norm(obs->value, a).value;
  });
}

rdiff_status rdiff_autocorr(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                            uint64_t seed, double* re, double* im) {
  return guarded([&] {
    need(ps, "ps");
    need(spec, "spec");
    need(obs, "obs");
    need(re, "re");
    need(im, "im");
    const auto s = rdiff::sample(spec->value, ps->value, seed);
    const auto v = rdiff::autocorr(ps->value, s, obs->value);
    *re = v.real();
    *im = v.imag();
  });
}

rdiff_status rdiff_exact_mean(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                              double* re, double* im) {
  return guarded([&] {
    need(ps, "ps");
    need(spec, "spec");
    need(obs, "obs");
    need(re, "re");
    need(im, "im");
    const auto v = rdiff::exact_mean(ps->value, spec->value, obs->value);
    *re = v.real();
    *im = v.imag();
  });
}

rdiff_status rdiff_exact_variance(const rdiff_pointset* ps, const rdiff_spec* spec, const rdiff_observable* obs,
                                  double* variance, double* normalized) {
  return guarded([&] {
    need(ps, "ps");
    need(spec, "spec");
    need(obs, "obs");
    need(variance, "variance");
    const auto st = rdiff::exact_variance(ps->value, spec->value, obs->value);
    *variance = st.variance;
    if (normalized) *normalized = st.normalized;
  });
}

rdiff_status rdiff_constants_json(int precise, char** out) {
  return guarded([&] {
    need(out, "out");
    *out = dup_string(rdiff::to_json(rdiff::recompute_constants(params_of(precise))).dump(2));
  });
}

rdiff_status rdiff_rate_J(double eps_bar, double d, double D, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = rdiff::rate_J(eps_bar, d, D);
  });
}

rdiff_status rdiff_rate_j(double eps_bar, double s, double d, double D, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = rdiff::rate_j(eps_bar, s, d, D);
  });
}

rdiff_status rdiff_h(double u, double v, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = rdiff::h(u, v, rdiff::RateParams::published());
  });
}

rdiff_status rdiff_ld_bound(double epsilon, size_t cardinality, double scale, double s, rdiff_theorem which,
                            int precise, double* out) {
  return guarded([&] {
    need(out, "out");
    rdiff::require(which >= RDIFF_THEOREM_A_SIMPLE && which <= RDIFF_THEOREM_B_ADDITION, "unknown theorem");
    *out = rdiff::ld_bound({epsilon, cardinality, scale, s}, static_cast<rdiff::Theorem>(which), params_of(precise));
  });
}

rdiff_status rdiff_laplace_gap_bound(size_t cardinality, double scale, rdiff_model model, int precise, double* out) {
  return guarded([&] {
    need(out, "out");
    *out = rdiff::laplace_gap_bound(cardinality, scale, model == RDIFF_MODEL_B ? rdiff::Model::B : rdiff::Model::A,
                                    params_of(precise));
  });
}

rdiff_status rdiff_run_command(const char* command, const char* config_json, uint64_t seed, int has_seed,
                               const char* out_dir, int threads, int timestamps, char** report, char** text,
                               int* pass) {
  if (report) *report = nullptr;
  if (text) *text = nullptr;
  return guarded([&] {
    need(command, "command");
    nlohmann::json config;
    if (config_json) {
      try {
        config = nlohmann::json::parse(config_json);
      } catch (const nlohmann::json::parse_error& e) {
        rdiff::fail(rdiff::ErrorCode::Config, std::string("config is not valid JSON: ") + e.what());
      }
    }
    rdiff::CommandOptions opt;
    if (has_seed) opt.seed = seed;
    opt.threads = threads;
    opt.timestamps = timestamps != 0;
    const rdiff::CommandResult r = rdiff::run_command(command, config, opt);
    if (out_dir) {
      namespace fs = std::filesystem;
      std::error_code ec;
      fs::create_directories(out_dir, ec);
      if (ec) rdiff::fail(rdiff::ErrorCode::Io, "cannot create output directory: " + ec.message());
      for (const auto& [name, contents] : r.files) {
        std::ofstream f(fs::path(out_dir) / name, std::ios::binary);
        f << contents;
        if (!f) rdiff::fail(rdiff::ErrorCode::Io, "cannot write " + name);
      }
    }
    if (report) *report = dup_string(r.report.dump(2));
    if (text) *text = dup_string(r.text);
    if (pass) *pass = r.pass ? 1 : 0;
  });
}

}  // extern "C"
