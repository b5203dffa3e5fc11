#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "srim/metrics.hpp"
#include "srim/topology.hpp"

using namespace srim;

namespace {

EpisodeLog make_log(std::int64_t episode, std::int64_t step_end, std::vector<AgentEpisodeStats> agents) {
  EpisodeLog log;
  log.seed = 1;
  log.episode = episode;
  log.step_end = step_end;
  log.agents = std::move(agents);
  return log;
}

std::vector<double> random_rewards(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(0.0, 100.0);
  std::bernoulli_distribution zero(0.2);
  std::vector<double> r(n);
  for (auto& x : r) x = zero(rng) ? 0.0 : u(rng);
  return r;
}

}  // namespace

TEST_CASE("bci worked examples") {
  const auto k5 = analyze(build_named("complete", 5));
  const std::vector<double> r{3, 1, 4, 1, 5};
  CHECK(bci(r, k5).value.value() == doctest::Approx(1.0 - 4 * 49.0 / 256.0));
  CHECK(std::abs(*bci(r, k5).value - 0.2344) < 1e-4);

  const auto star = analyze(build_named("star", 5));
  const std::vector<double> hub_only{100, 0, 0, 0, 0};
  CHECK(*bci(hub_only, star).value == doctest::Approx(0.75));

  const auto c5 = analyze(build_named("cycle", 5));
  const std::vector<double> equal(5, 7.0);
  CHECK(*bci(equal, c5).value == doctest::Approx(0.5));

  const std::vector<double> zeros(5, 0.0);
  CHECK_FALSE(bci(zeros, star).value.has_value());
  const std::vector<double> short_vec{1.0};
  CHECK_THROWS_AS(bci(short_vec, star), std::invalid_argument);
}

TEST_CASE("bci stays inside the bridging range and is scale invariant") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> scale(1e-3, 1e3);
  for (const auto& name : named_topologies()) {
    const auto p = analyze(build_named(name, 5));
    const auto range = tctr(p);
    for (int k = 0; k < 2000; ++k) {
      const auto r = random_rewards(rng, 5);
      const auto s = bci(r, p);
      if (!s.value) continue;
      CHECK(*s.value >= range.lower - 1e-12);
      CHECK(*s.value <= range.upper + 1e-12);
      auto scaled = r;
      const double lam = scale(rng);
      for (auto& x : scaled) x *= lam;
      CHECK(std::abs(*bci(scaled, p).value - *s.value) < 1e-12);
    }
  }
}

TEST_CASE("moving reward mass toward the strongest bridge never lowers bci") {
  std::mt19937_64 rng(11);
  for (const auto& name : named_topologies()) {
    const auto p = analyze(build_named(name, 5));
    const auto lo = std::min_element(p.bridging.begin(), p.bridging.end()) - p.bridging.begin();
    const auto hi = std::max_element(p.bridging.begin(), p.bridging.end()) - p.bridging.begin();
    for (int k = 0; k < 500; ++k) {
      auto r = random_rewards(rng, 5);
      r[lo] += 1.0;
      const double before = *bci(r, p).value;
      const double moved = r[lo] * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
      r[lo] -= moved;
      r[hi] += moved;
      CHECK(*bci(r, p).value >= before - 1e-12);
    }
  }
}

TEST_CASE("bci on an episode log uses the requested basis") {
  const auto star = analyze(build_named("star", 5));
  auto log = make_log(0, 10, std::vector<AgentEpisodeStats>(5));
  log.agents[0].apples = 4;
  log.agents[0].env_reward = -46;
  log.agents[1].apples = 4;
  log.agents[1].env_reward = 4;
  CHECK(*bci(log, star).value == doctest::Approx((0.75 * 4 + 0.0 * 4) / 8));
  const auto raw = bci(log, star, RewardBasis::RawEnv);
  CHECK(raw.basis == RewardBasis::RawEnv);
  CHECK(*raw.value == doctest::Approx(0.75 * -46 / -42.0));
}

TEST_CASE("sci") {
  CHECK(sci(500, 0) == doctest::Approx(1.0 - 2e-9).epsilon(1e-15));
  CHECK(sci(0, 300) < 1e-8);
  CHECK(sci(0, 0) == 0.5);
  CHECK_THROWS_AS(sci(1, 1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(sci(1, 1, -1.0), std::invalid_argument);
  for (int e = 0; e < 40; e += 3)
    for (int a = 0; a < 40; a += 7) {
      const double s = sci(e, a);
      CHECK(s > 0.0);
      CHECK(s < 1.0);
      CHECK(s + sci(a, e) == doctest::Approx(1.0).epsilon(1e-15));
    }
}

TEST_CASE("utilitarian sums extrinsic rewards only") {
  auto log = make_log(0, 1, std::vector<AgentEpisodeStats>(5));
  CHECK(utilitarian(log) == 0.0);
  for (int i = 0; i < 5; ++i) {
    log.agents[i].env_reward = i + 1;
    log.agents[i].socio_reward = 1000.0 * i;
  }
  CHECK(utilitarian(log) == 15.0);
}

TEST_CASE("stage segmentation") {
  const auto full_scale = default_stages(100'000'000);
  CHECK(full_scale.stage3 == StepWindow{60'000'000, 100'000'000});
  CHECK(full_scale.stage1.begin == 1'000'000);
  CHECK(full_scale.stage2.end == 60'000'000);
  const auto desk = default_stages(1'000'000);
  CHECK(desk.stage3 == StepWindow{600'000, 1'000'000});
  for (const auto& w : {full_scale, desk}) {
    CHECK(w.stage1.begin < w.stage1.end);
    CHECK(w.stage1.end == w.stage2.begin);
    CHECK(w.stage2.end <= w.stage3.begin);
    CHECK(w.stage3.end - w.stage3.begin == (w.stage3.end * 2) / 5);
  }
  CHECK_THROWS_AS(segment_stages(1000, 500, 500), std::invalid_argument);
  CHECK_THROWS_AS(segment_stages(1000, 600, 500), std::invalid_argument);
  CHECK_THROWS_AS(segment_stages(1000, 10, 700), std::invalid_argument);
  CHECK_THROWS_AS(segment_stages(1000, -1, 500), std::invalid_argument);
}

TEST_CASE("quantiles interpolate linearly") {
  CHECK(quantile({0.520, 0.525, 0.529}, 0.5) == doctest::Approx(0.525));
  CHECK(quantile({1, 2, 3, 4}, 0.5) == doctest::Approx(2.5));
  CHECK(quantile({1, 2, 3, 4}, 0.25) == doctest::Approx(1.75));
  CHECK(quantile({4, 3, 2, 1}, 0.75) == doctest::Approx(3.25));
  CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("stage aggregation matches a naive rescan") {
  const auto windows = segment_stages(100, 0, 60);  // [0,10) [10,60) [60,100]
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 20);
  std::vector<EpisodeLog> logs;
  for (int e = 0; e < 20; ++e) {
    std::vector<AgentEpisodeStats> a(3);
    for (auto& s : a) {
      s.fire_count = count(rng);
      s.apples = count(rng);
      s.env_reward = static_cast<double>(s.apples - s.fire_count);
    }
    logs.push_back(make_log(e, (e + 1) * 5, a));
  }
  for (Quantity q : {Quantity::Apples, Quantity::FireCount, Quantity::EnvReward}) {
    const auto cells = stage_aggregate(logs, windows, q);
    CHECK(cells.size() == 9);
    for (const auto& c : cells) {
      std::vector<double> v;
      for (const auto& log : logs) {
        const auto& w = windows[c.stage];
        if (log.step_end > w.begin && log.step_end <= w.end) v.push_back(quantity_of(log.agents[c.agent], q));
      }
      REQUIRE(!v.empty());
      double sum = 0.0;
      for (double x : v) sum += x;
      CHECK(c.episodes == static_cast<std::int64_t>(v.size()));
      CHECK(c.mean_summed == doctest::Approx(sum / v.size()));
      std::sort(v.begin(), v.end());
      CHECK(c.median == doctest::Approx(quantile(v, 0.5)));
      CHECK(c.q1 <= c.median);
      CHECK(c.median <= c.q3);
    }
  }
}

TEST_CASE("stage aggregation edge cases") {
  const auto windows = segment_stages(30, 0, 18);  // [0,3) [3,18) [18,30]
  std::vector<EpisodeLog> logs;
  for (int e = 0; e < 3; ++e) {
    std::vector<AgentEpisodeStats> a(1);
    a[0].fire_count = 7;
    logs.push_back(make_log(e, e == 0 ? 3 : (e == 1 ? 10 : 30), a));
  }
  const auto cells = stage_aggregate(logs, windows, Quantity::FireCount);
  for (const auto& c : cells) {
    CHECK(c.episodes == 1);
    CHECK(c.mean_summed == 7.0);
    CHECK(c.q3 - c.q1 == 0.0);
  }
  logs.pop_back();
  CHECK_THROWS_AS(stage_aggregate(logs, windows, Quantity::FireCount), std::invalid_argument);
}

TEST_CASE("distribution summaries drop missing samples") {
  std::vector<std::optional<double>> s{0.1, std::nullopt, 0.3, 0.2, std::nullopt};
  const auto d = summarize(s);
  CHECK(d.count == 3);
  CHECK(d.dropped == 2);
  CHECK(d.median == doctest::Approx(0.2));
  CHECK(d.mean == doctest::Approx(0.2));
}

TEST_CASE("quantity names round trip") {
  for (Quantity q : {Quantity::Apples, Quantity::EnvReward, Quantity::SocioReward, Quantity::FireCount,
                     Quantity::CleanCount})
    CHECK(parse_quantity(to_string(q)) == q);
  CHECK_THROWS(parse_quantity("nope"));
}
