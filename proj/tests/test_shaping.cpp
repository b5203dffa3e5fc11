#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <random>

#include "srim/shaping.hpp"

using namespace srim;

namespace {

std::vector<Portfolio> resolve(const Topology& t, const PreferenceProfile& p) {
  return resolve_portfolio(t, analyze(t), p, IdMapping::identity(t.size()));
}

}  // namespace

TEST_CASE("worked portfolio examples") {
  const auto star = build_named("star", 5);
  const auto hbn = resolve(star, PreferenceProfile::preset("HBN", 5));
  CHECK(hbn[0].empty());
  for (int i = 1; i < 5; ++i) CHECK(hbn[i] == Portfolio{{0, 1.0}});

  const auto house = build_named("house", 5);
  const auto cn = resolve(house, PreferenceProfile::preset("CN", 5));
  CHECK(cn[1] == Portfolio{{2, 1.0}, {4, 1.0}});
  CHECK(cn[0].empty());

  for (const auto& name : named_topologies()) {
    const auto t = build_named(name, 5);
    for (const auto& p : resolve(t, PreferenceProfile::baseline(5))) CHECK(p.empty());
  }
}

TEST_CASE("overlapping sets accumulate weight") {
  const auto house = build_named("house", 5);
  const auto p = resolve(house, PreferenceProfile::homogeneous(5, {1.0, 0.5, 0.25}));
  // Agent 4: nearest {1,2}, clique {1,2}, hbn {1,2}.
  CHECK(p[4] == Portfolio{{1, 1.75}, {2, 1.75}});
  // Agent 0: nearest {1,3}, no clique, hbn {1,2,3}.
  CHECK(p[0] == Portfolio{{1, 1.25}, {2, 0.25}, {3, 1.25}});
}

TEST_CASE("shape worked examples") {
  const auto star = build_named("star", 5);
  const auto nn = resolve(star, PreferenceProfile::preset("NN", 5));
  const std::vector<double> r{1, 2, 3, 4, 5};
  const auto s = shape(r, nn);
  CHECK(s.total[0] == 15.0);
  CHECK(s.total[1] == 3.0);
  const std::vector<double> zero(5, 0.0);
  for (double x : shape(zero, nn).socio) CHECK(x == 0.0);

  const auto house = build_named("house", 5);
  const auto cn = resolve(house, PreferenceProfile::preset("CN", 5));
  const std::vector<double> one{0, 10, 0, 0, 0};
  CHECK(shape(one, cn).socio == std::vector<double>{0, 0, 10, 0, 10});
}

TEST_CASE("shape is exact, linear and counts each reward once per neighbor") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-50.0, 50.0), w(0.0, 2.0);
  std::uniform_int_distribution<int> small(-50, 10);
  for (const auto& name : named_topologies()) {
    const auto t = build_named(name, 5);
    for (int k = 0; k < 200; ++k) {
      const auto prof = PreferenceProfile::homogeneous(5, {w(rng), w(rng), w(rng)});
      const auto ports = resolve(t, prof);
      std::vector<double> r(5);
      for (auto& x : r) x = u(rng);
      const auto s = shape(r, ports);
      for (int i = 0; i < 5; ++i) CHECK(s.total[i] == s.env[i] + s.socio[i]);
      std::vector<double> scaled(r);
      for (auto& x : scaled) x *= 4.0;
      const auto s4 = shape(scaled, ports);
      for (int i = 0; i < 5; ++i) CHECK(s4.socio[i] == doctest::Approx(4.0 * s.socio[i]));
      // Integer rewards with unit weights: the difference vanishes exactly.
      std::vector<double> ints(5);
      for (auto& x : ints) x = small(rng);
      for (const char* preset : {"NN", "CN", "HBN"}) {
        const auto si = shape(ints, resolve(t, PreferenceProfile::preset(preset, 5)));
        for (int i = 0; i < 5; ++i) CHECK(si.total[i] - si.env[i] - si.socio[i] == 0.0);
      }
    }
  }
  for (const char* name : {"complete", "cycle"}) {
    const auto t = build_named(name, 5);
    const double alpha = 0.7;
    const auto ports = resolve(t, PreferenceProfile::homogeneous(5, {alpha, 0, 0}));
    const std::vector<double> r{3, -1, 4, 1, -5};
    const auto s = shape(r, ports);
    double socio = 0.0, env = 0.0;
    for (int i = 0; i < 5; ++i) {
      socio += s.socio[i];
      env += r[i];
    }
    CHECK(socio == doctest::Approx(alpha * t.degree(0) * env));
  }
}

TEST_CASE("id mapping relabels portfolios") {
  const auto star = build_named("star", 5);
  // Agent 3 sits on the hub vertex.
  const IdMapping m({3, 1, 2, 0, 4});
  CHECK(m.agent_of(0) == 3);
  const auto p = resolve_portfolio(star, analyze(star), PreferenceProfile::preset("HBN", 5), m);
  CHECK(p[3].empty());
  CHECK(p[0] == Portfolio{{3, 1.0}});
  CHECK_THROWS_AS(IdMapping({0, 0, 1}), std::invalid_argument);
  CHECK_THROWS_AS(IdMapping({0, 3}), std::invalid_argument);
}

TEST_CASE("profiles") {
  CHECK(PreferenceProfile::baseline(5).is_baseline());
  CHECK(PreferenceProfile::preset("baseline", 5).is_baseline());
  CHECK(PreferenceProfile::preset("NN", 5).is_one_hot());
  CHECK_FALSE(PreferenceProfile::homogeneous(5, {1, 1, 0}).is_one_hot());
  CHECK_THROWS_AS(PreferenceProfile::preset("XX", 5), std::invalid_argument);
  CHECK_THROWS_AS(PreferenceProfile({{-1, 0, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(PreferenceProfile({{std::nan(""), 0, 0}}), std::invalid_argument);
  const auto base = PreferenceProfile::baseline(5);
  const auto one = set_weights(base, 0, {1, 0, 0});
  CHECK(one.at(0) == PreferenceWeights{1, 0, 0});
  CHECK(one.at(1) == PreferenceWeights{});
  CHECK(set_weights(one, 0, {1, 0, 0}) == one);
  CHECK_THROWS_AS(set_weights(base, 0, {-1, 0, 0}), std::invalid_argument);
  CHECK_THROWS_AS(set_weights(base, 9, {1, 0, 0}), std::invalid_argument);
  const auto t = build_named("house", 5);
  CHECK(resolve(t, set_weights(one, 0, {1, 0, 0})) == resolve(t, one));
  CHECK_THROWS_AS(resolve(t, PreferenceProfile::baseline(4)), std::invalid_argument);
}
