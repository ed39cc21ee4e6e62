#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "rdiff/rdiff.h"

namespace {

std::string take(char* s) {
  std::string out = s ? s : "";
  rdiff_string_free(s);
  return out;
}

}  // namespace

TEST_CASE("point set handles") {
  rdiff_pointset* ps = nullptr;
  REQUIRE(rdiff_pointset_lattice(1, 1.0, 3.0, &ps) == RDIFF_OK);
  CHECK(rdiff_pointset_size(ps) == 7);
  CHECK(rdiff_pointset_dim(ps) == 1);
  std::vector<double> coords(7);
  CHECK(rdiff_pointset_coords(ps, coords.data(), coords.size()) == RDIFF_OK);
  CHECK(coords.front() == -3.0);
  CHECK(rdiff_pointset_coords(ps, coords.data(), 3) == RDIFF_E_INVALID_ARGUMENT);
  double md = 0.0;
  int single = -1;
  CHECK(rdiff_pointset_min_distance(ps, &md, &single) == RDIFF_OK);
  CHECK(md == 1.0);
  CHECK(single == 0);

  char* csv = nullptr;
  REQUIRE(rdiff_pointset_to_csv(ps, &csv) == RDIFF_OK);
  const std::string text = take(csv);
  rdiff_pointset* back = nullptr;
  REQUIRE(rdiff_pointset_from_csv(text.c_str(), &back) == RDIFF_OK);
  CHECK(rdiff_pointset_size(back) == 7);
  rdiff_pointset_free(back);
  rdiff_pointset_free(ps);

  const double pts[] = {0.0, 0.0, 0.5, 0.0};
  rdiff_pointset* bad = nullptr;
  CHECK(rdiff_pointset_from_coords(2, pts, 2, 1.0, &bad) == RDIFF_E_INVALID_ARGUMENT);
  CHECK(bad == nullptr);
  CHECK(std::strlen(rdiff_last_error()) > 0);
  CHECK(rdiff_pointset_lattice(1, -1.0, 3.0, &bad) != RDIFF_OK);
  CHECK(rdiff_pointset_lattice(1, 1.0, 3.0, nullptr) == RDIFF_E_INVALID_ARGUMENT);

  rdiff_pointset* one = nullptr;
  REQUIRE(rdiff_pointset_from_coords(1, pts, 1, 1.0, &one) == RDIFF_OK);
  CHECK(rdiff_pointset_min_distance(one, &md, &single) == RDIFF_OK);
  CHECK(single == 1);
  CHECK(md == std::numeric_limits<double>::infinity());
  rdiff_pointset_free(one);
  rdiff_pointset_free(nullptr);
}

TEST_CASE("norms and correlation through the C API") {
  const double pts[] = {0.0, 1.0};
  rdiff_pointset* ps = nullptr;
  REQUIRE(rdiff_pointset_from_coords(1, pts, 2, 1.0, &ps) == RDIFF_OK);
  rdiff_observable* g = nullptr;
  REQUIRE(rdiff_observable_gaussian(1, 1.0, &g) == RDIFF_OK);
  double v = 0.0;
  CHECK(rdiff_gamma_norm(g, ps, &v) == RDIFF_OK);
  CHECK(v == doctest::Approx(1.0 + std::exp(-0.5)).epsilon(1e-15));
  CHECK(rdiff_sobolev_norm(g, 2.0, &v) == RDIFF_OK);
  CHECK(v == doctest::Approx(0.5 * (std::sqrt(2 * M_PI) + 2)).epsilon(1e-10));
  CHECK(rdiff_sobolev_d_norm(g, 2.0, &v) == RDIFF_OK);
  CHECK(rdiff_gamma_delta_seminorm(g, ps, 0.0, &v) == RDIFF_OK);
  CHECK(v == 0.0);
  CHECK(rdiff_sobolev_norm(g, -1.0, &v) == RDIFF_E_INVALID_ARGUMENT);

  rdiff_spec* a = nullptr;
  REQUIRE(rdiff_spec_bernoulli(1.0, -1.0, 0.5, &a) == RDIFF_OK);
  CHECK(rdiff_spec_model(a) == RDIFF_MODEL_A);
  double re = 0.0, im = 0.0;
  CHECK(rdiff_exact_mean(ps, a, g, &re, &im) == RDIFF_OK);
  CHECK(re == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rdiff_autocorr(ps, a, g, 4, &re, &im) == RDIFF_OK);
  CHECK(std::abs(std::abs(re - 1.0) - std::exp(-0.5)) < 1e-14);
  double var = 0.0, norm = 0.0;
  CHECK(rdiff_exact_variance(ps, a, g, &var, &norm) == RDIFF_OK);
  CHECK(var == doctest::Approx(4 * std::exp(-1.0)).epsilon(1e-14));
  CHECK(norm <= 4.0);

  rdiff_spec* b = nullptr;
  REQUIRE(rdiff_spec_symmetric_dislocations(1, 0.1, &b) == RDIFF_OK);
  CHECK(rdiff_spec_model(b) == RDIFF_MODEL_B);
  CHECK(rdiff_exact_variance(ps, b, g, &var, &norm) == RDIFF_OK);
  CHECK(norm <= 4.0);

  rdiff_spec* j = nullptr;
  CHECK(rdiff_spec_from_json("{\"kind\":\"A\",\"default\":{\"support\":[1,-1],\"probs\":[0.5,0.5]}}", &j) == RDIFF_OK);
  rdiff_spec_free(j);
  j = nullptr;
  CHECK(rdiff_spec_from_json("{\"kind\":\"C\"}", &j) == RDIFF_E_CONFIG);
  CHECK(rdiff_spec_from_json("not json", &j) == RDIFF_E_CONFIG);
  CHECK(j == nullptr);

  rdiff_spec_free(a);
  rdiff_spec_free(b);
  rdiff_observable_free(g);
  rdiff_pointset_free(ps);
}

TEST_CASE("rates through the C API") {
  double v = 0.0;
  CHECK(rdiff_h(0.0, 0.0, &v) == RDIFF_OK);
  CHECK(v == 0.0);
  CHECK(rdiff_rate_J(1e-8, 0.0525, 4540, &v) == RDIFF_OK);
  CHECK(v / (1e-16 / 8) == doctest::Approx(1.0).epsilon(1e-4));
  double j = 0.0;
  CHECK(rdiff_rate_j(3.0, 4.0, 0.0525, 4540, &j) == RDIFF_OK);
  CHECK(rdiff_rate_J(3.0, 0.0525, 4540, &v) == RDIFF_OK);
  CHECK(j == doctest::Approx(v).epsilon(1e-12));
  CHECK(rdiff_ld_bound(0.0, 10, 1.0, 4.0, RDIFF_THEOREM_A_SIMPLE, 0, &v) == RDIFF_OK);
  CHECK(v == 2.0);
  CHECK(rdiff_laplace_gap_bound(10, 0.0525, RDIFF_MODEL_A, 0, &v) == RDIFF_OK);
  CHECK(v == doctest::Approx(10 * 4540 * std::pow(0.0525, 3)).epsilon(1e-14));
  CHECK(rdiff_laplace_gap_bound(10, 0.06, RDIFF_MODEL_A, 0, &v) == RDIFF_E_DOMAIN);

  char* out = nullptr;
  REQUIRE(rdiff_constants_json(1, &out) == RDIFF_OK);
  const auto table = nlohmann::json::parse(take(out));
  CHECK(table.at("d").get<double>() == doctest::Approx(0.5 * std::log1p(0.110909)).epsilon(1e-15));
}

TEST_CASE("commands through the C API") {
  char* report = nullptr;
  char* text = nullptr;
  int pass = 0;
  REQUIRE(rdiff_run_command("constants", nullptr, 0, 0, nullptr, 1, 0, &report, &text, &pass) == RDIFF_OK);
  CHECK(pass == 1);
  const auto r = nlohmann::json::parse(take(report));
  CHECK(r.at("config").at("seed") == 0);
  CHECK(!r.contains("runtime_seconds"));
  CHECK(take(text).find("PASS") != std::string::npos);

  CHECK(rdiff_run_command("run-ld", "{\"bogus\":1}", 0, 0, nullptr, 1, 0, &report, &text, &pass) == RDIFF_E_CONFIG);
  CHECK(rdiff_run_command("run-ld", "{", 0, 0, nullptr, 1, 0, &report, &text, &pass) == RDIFF_E_CONFIG);
  CHECK(rdiff_run_command("no-such", "{}", 0, 0, nullptr, 1, 0, &report, &text, &pass) == RDIFF_E_CONFIG);
  CHECK(rdiff_run_command(nullptr, "{}", 0, 0, nullptr, 1, 0, &report, &text, &pass) == RDIFF_E_INVALID_ARGUMENT);
}
