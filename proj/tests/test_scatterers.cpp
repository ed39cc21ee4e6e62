#include <doctest.h>

#include <cmath>
#include <nlohmann/json.hpp>

#include "rdiff/error.hpp"
#include "rdiff/pointset.hpp"
#include "rdiff/scatterers.hpp"

using namespace rdiff;
using nlohmann::json;

TEST_CASE("sampling is deterministic and per-site") {
  const PointSet ps = lattice(1, 1.0, 1.0);
  const ScattererSpec spec = bernoulli_amplitudes();
  const Sample a = sample(spec, ps, 123);
  const Sample b = sample(spec, ps, 123);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a.amplitudes[i] == b.amplitudes[i]);
    CHECK(std::abs(std::abs(a.amplitudes[i]) - 1.0) == 0.0);
  }
  // Site i depends only on (seed, i): a longer set keeps the first draws.
  const Sample longer = sample(spec, lattice(1, 1.0, 10.0), 123);
  for (std::size_t i = 0; i < 3; ++i) CHECK(longer.indices[i] == a.indices[i]);
  CHECK(a.seed == 123);
}

TEST_CASE("degenerate spec yields the constant") {
  AmplitudeSpec spec;
  spec.default_law = AmplitudeLaw{{Complex(0.5, -2.0)}, {1.0}};
  const Sample s = sample(ScattererSpec{spec}, lattice(2, 1.0, 2.0), 7);
  for (const Complex& v : s.amplitudes) CHECK(v == Complex(0.5, -2.0));
}

TEST_CASE("site frequencies match probabilities") {
  AmplitudeSpec spec;
  spec.default_law = AmplitudeLaw{{1.0, 2.0, 3.0}, {0.2, 0.5, 0.3}};
  const PointSet ps = lattice(1, 1.0, 0.0);
  const std::size_t draws = 100000;
  std::size_t counts[3] = {0, 0, 0};
  for (std::size_t k = 0; k < draws; ++k) ++counts[sample(ScattererSpec{spec}, ps, k).indices[0]];
  const double probs[3] = {0.2, 0.5, 0.3};
  for (int i = 0; i < 3; ++i) {
    const double sd = std::sqrt(draws * probs[i] * (1.0 - probs[i]));
    CHECK(std::abs(double(counts[i]) - draws * probs[i]) <= 4.0 * sd);
  }
}

TEST_CASE("bounds_of examples") {
  const AmplitudeBounds b1 = bounds_of(bernoulli_amplitudes());
  CHECK(b1.M == 0.0);
  CHECK(b1.B == 1.0);
  CHECK(b1.K == 1.0);

  AmplitudeSpec c;
  c.default_law = AmplitudeLaw{{1.0}, {1.0}};
  const AmplitudeBounds b2 = bounds_of(c);
  CHECK(b2.M == 1.0);
  CHECK(b2.B == 0.0);
  CHECK(b2.K == 0.0);

  const AmplitudeBounds b3 = bounds_of(bernoulli_amplitudes(2.0, 0.0, 0.5));
  CHECK(b3.M == 1.0);
  CHECK(b3.B == 1.0);
  CHECK(b3.K == 3.0);

  // Permuting support entries leaves the bounds unchanged.
  AmplitudeSpec p1, p2;
  p1.default_law = AmplitudeLaw{{Complex(1, 1), Complex(-2, 0), Complex(0, 3)}, {0.1, 0.6, 0.3}};
  p2.default_law = AmplitudeLaw{{Complex(0, 3), Complex(1, 1), Complex(-2, 0)}, {0.3, 0.1, 0.6}};
  CHECK(bounds_of(p1).K == doctest::Approx(bounds_of(p2).K).epsilon(1e-15));
}

TEST_CASE("delta_of examples") {
  CHECK(delta_of(symmetric_dislocations(1, 0.125)) == 0.125);
  DislocationSpec zero;
  zero.default_law = DislocationLaw{{{0.0}}, {1.0}};
  CHECK(delta_of(zero) == 0.0);

  DislocationSpec mixed;
  mixed.dim = 2;
  mixed.delta = 0.5;
  mixed.default_law = DislocationLaw{{{0.1, 0.0}, {-0.1, 0.0}}, {0.5, 0.5}};
  mixed.overrides[3] = DislocationLaw{{{0.0, 0.3}, {0.0, -0.4}}, {0.5, 0.5}};
  mixed.overrides[7] = DislocationLaw{{{0.2, 0.2}}, {1.0}};
  mixed.validate();
  CHECK(delta_of(mixed) == doctest::Approx(0.4).epsilon(1e-15));
}

TEST_CASE("drawn values respect the uniform bounds") {
  const PointSet ps = lattice(2, 1.0, 4.0);
  AmplitudeSpec amp;
  amp.default_law = AmplitudeLaw{{Complex(1, 0), Complex(0, 2), Complex(-1, -1)}, {0.3, 0.3, 0.4}};
  amp.overrides[5] = AmplitudeLaw{{Complex(3, 0)}, {1.0}};
  const AmplitudeBounds bnd = bounds_of(amp);
  DislocationSpec dis;
  dis.dim = 2;
  dis.delta = 0.2;
  dis.default_law = DislocationLaw{{{0.2, 0.0}, {0.0, -0.15}, {0.1, 0.1}}, {0.2, 0.3, 0.5}};
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Sample sa = sample(ScattererSpec{amp}, ps, seed);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      CHECK(std::abs(sa.amplitudes[i] - amp.law(i).mean()) <= bnd.B + 1e-15);
    }
    const Sample sb = sample(ScattererSpec{dis}, ps, seed);
    for (std::size_t i = 0; i < ps.size(); ++i) {
      auto w = sb.dislocation(i);
      CHECK(std::hypot(w[0], w[1]) <= dis.delta);
    }
  }
}

TEST_CASE("distinct seeds give distinct samples") {
  const PointSet ps = lattice(1, 1.0, 20.0);
  CHECK(sample(bernoulli_amplitudes(), ps, 1).indices != sample(bernoulli_amplitudes(), ps, 2).indices);
}

TEST_CASE("malformed specs are rejected") {
  AmplitudeSpec bad;
  bad.default_law = AmplitudeLaw{{1.0, -1.0}, {0.5, 0.4}};
  CHECK_THROWS_AS(bad.validate(), Error);
  AmplitudeSpec missing;
  missing.overrides[0] = AmplitudeLaw{{1.0}, {1.0}};
  CHECK_THROWS_AS(sample(ScattererSpec{missing}, lattice(1, 1.0, 1.0), 0), Error);
  DislocationSpec far;
  far.delta = 0.1;
  far.default_law = DislocationLaw{{{0.2}}, {1.0}};
  CHECK_THROWS_AS(far.validate(), Error);
}

TEST_CASE("JSON round trip and strict keys") {
  const json j = json::parse(R"({"kind":"A","default":{"support":[[1,0],[-1,0]],"probs":[0.5,0.5]},
                                 "overrides":{"2":{"support":[[0,1]],"probs":[1]}}})");
  const ScattererSpec spec = spec_from_json(j);
  const auto& a = std::get<AmplitudeSpec>(spec);
  CHECK(a.law(2).support[0] == Complex(0, 1));
  CHECK(a.law(0).support[1] == Complex(-1, 0));
  CHECK(spec_from_json(spec_to_json(spec)) .index() == 0);
  CHECK(spec_to_json(spec_from_json(spec_to_json(spec))) == spec_to_json(spec));

  const json jb = json::parse(R"({"kind":"B","delta":0.125,"default":{"support":[[0.125],[-0.125]],"probs":[0.5,0.5]}})");
  const auto& b = std::get<DislocationSpec>(spec_from_json(jb));
  CHECK(b.delta == 0.125);
  CHECK(b.dim == 1);

  try {
    spec_from_json(json::parse(R"({"kind":"A","default":{"support":[[1,0]],"probs":[1]},"extra":1})"));
    FAIL("unknown key accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Config);
  }
}
