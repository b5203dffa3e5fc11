#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "srim/analysis.hpp"
#include "stat_oracles.hpp"

using namespace srim;

namespace {

std::vector<double> sample(std::mt19937_64& rng, int n, double mean, double sd) {
  std::normal_distribution<double> d(mean, sd);
  std::vector<double> x(n);
  for (auto& v : x) v = d(rng);
  return x;
}

SampleSummary summary(std::vector<double> x) { return SampleSummary::of(x); }

bool close_rel(double a, double b, double tol) { return std::abs(a - b) <= tol * std::max(1.0, std::abs(b)); }

}  // namespace

TEST_CASE("welch t, p and dof match the high-precision oracle") {
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> size(2, 12);
  std::uniform_real_distribution<double> loc(-1.0, 1.0), spread(0.01, 2.0);
  for (int k = 0; k < 100; ++k) {
    const auto a = sample(rng, size(rng), loc(rng), spread(rng));
    const auto b = sample(rng, size(rng), loc(rng), spread(rng));
    const auto w = welch_t(SampleSummary::of(a), SampleSummary::of(b));
    const auto o = oracle::welch(a, b);
    CHECK(close_rel(w.t, o.t, 1e-9));
    CHECK(close_rel(w.dof, o.dof, 1e-9));
    CHECK(std::abs(w.p - o.p) < 1e-10);
    CHECK_FALSE(w.degenerate);
  }
}

TEST_CASE("ci95 matches the high-precision oracle") {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> size(2, 30);
  for (int k = 0; k < 100; ++k) {
    const auto x = sample(rng, size(rng), 0.3, 0.1);
    const auto ci = ci95(SampleSummary::of(x));
    const auto [lo, hi] = oracle::ci95(x);
    CHECK(std::abs(ci.lower - lo) < 1e-9);
    CHECK(std::abs(ci.upper - hi) < 1e-9);
  }
}

TEST_CASE("t distribution primitives") {
  CHECK(student_t_cdf(0.0, 3.0) == doctest::Approx(0.5));
  CHECK(student_t_two_sided_p(0.0, 7.0) == doctest::Approx(1.0));
  // t_{0.975, 4} = 2.7764451051977987
  CHECK(student_t_quantile(0.975, 4.0) == doctest::Approx(2.7764451051977987).epsilon(1e-12));
  // Cauchy: P(|T| > 1) = 1/2 with one degree of freedom.
  CHECK(student_t_two_sided_p(1.0, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-14));
  CHECK_THROWS_AS(student_t_quantile(1.0, 3.0), std::invalid_argument);
}

TEST_CASE("bonferroni clamps and passes identity cases through") {
  CHECK(bonferroni(0.01, 3) == doctest::Approx(0.03));
  CHECK(bonferroni(0.4, 3) == 1.0);
  CHECK(bonferroni(1.0, 1) == 1.0);
  CHECK(bonferroni(0.0, 10) == 0.0);
  CHECK(bonferroni(0.0123, 1) == 0.0123);
  CHECK_THROWS_AS(bonferroni(-0.1, 2), std::invalid_argument);
  CHECK_THROWS_AS(bonferroni(0.1, 0), std::invalid_argument);
}

TEST_CASE("welch degenerate cases") {
  const auto same = welch_t(summary({0.0, 0.0, 0.0}), summary({0.0, 0.0}));
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  const auto apart = welch_t(summary({0.0, 0.0}), summary({1.0, 1.0}));
  CHECK(std::isinf(apart.t));
  CHECK(apart.t < 0);
  CHECK(apart.p == 0.0);
  CHECK(apart.degenerate);
  CHECK_THROWS_AS(welch_t(summary({1.0}), summary({1.0, 2.0})), std::invalid_argument);
}

TEST_CASE("preference comparison over three groups") {
  const std::vector<PreferenceGroup> groups{
      {"NN", {0.02, 0.03, 0.025, 0.028, 0.021}},
      {"CN", {0.15, 0.149, 0.152, 0.147, 0.153}},
      {"HBN", {0.29, 0.27, 0.31, 0.3, 0.28}},
  };
  const auto c = compare_preferences(groups, "bci");
  REQUIRE(c.pairs.size() == 3);
  CHECK(c.ascending == std::vector<std::string>{"NN", "CN", "HBN"});
  for (const auto& p : c.pairs) {
    CHECK(p.significant);
    CHECK(p.t < 0);
    CHECK(p.p_adjusted == doctest::Approx(std::min(1.0, 3 * p.p_raw)));
  }
  CHECK_THROWS_AS(compare_preferences({groups[0]}, "bci"), std::invalid_argument);
  CHECK_THROWS_AS(compare_preferences({groups[0], {"X", {1.0}}}, "bci"), std::invalid_argument);
}
