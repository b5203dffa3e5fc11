#include "srim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace srim {

BciSample bci(std::span<const double> rewards, const StructuralProfile& profile, RewardBasis basis) {
  if (rewards.size() != profile.bridging.size())
    throw std::invalid_argument("bci: " + std::to_string(rewards.size()) + " rewards for " +
                                std::to_string(profile.bridging.size()) + " vertices");
  BciSample s;
  s.tctr = tctr(profile);
  s.basis = basis;
  double weighted = 0.0, total = 0.0;
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    weighted += profile.bridging[i] * rewards[i];
    total += rewards[i];
  }
  if (total != 0.0) s.value = weighted / total;
  return s;
}

BciSample bci(const EpisodeLog& log, const StructuralProfile& profile, RewardBasis basis) {
  std::vector<double> r;
  r.reserve(log.agents.size());
  for (const auto& a : log.agents)
    r.push_back(basis == RewardBasis::Apples ? static_cast<double>(a.apples) : a.env_reward);
  return bci(r, profile, basis);
}

double sci(double effort, double apples, double epsilon) {
  if (!(epsilon > 0.0)) throw std::invalid_argument("sci: epsilon must be > 0");
  if (effort < 0.0 || apples < 0.0) throw std::invalid_argument("sci: counts must be >= 0");
  return (effort + epsilon) / (effort + apples + 2.0 * epsilon);
}

double utilitarian(const EpisodeLog& log) {
  double sum = 0.0;
  for (const auto& a : log.agents) sum += a.env_reward;
  return sum;
}

StageWindows segment_stages(std::int64_t total_steps, std::int64_t exploration_end,
                            std::int64_t transient_end) {
  if (!(0 <= exploration_end && exploration_end < transient_end && transient_end < total_steps))
    throw std::invalid_argument("stage boundaries must satisfy 0 <= exploration_end < "
                                "transient_end < total_steps");
  const auto conv_begin = static_cast<std::int64_t>(
      std::llround(static_cast<double>(total_steps) * (1.0 - kConvergenceFraction)));
  if (transient_end > conv_begin)
    throw std::invalid_argument("transient stage must end before the final 40% of the run");
  std::int64_t first_end = transient_end / 6;
  if (first_end <= exploration_end) first_end = exploration_end + (transient_end - exploration_end) / 2;
  if (first_end <= exploration_end || first_end >= transient_end)
    throw std::invalid_argument("stage boundaries leave an empty stage");
  return {{exploration_end, first_end}, {first_end, transient_end}, {conv_begin, total_steps}};
}

StageWindows default_stages(std::int64_t total_steps) {
  return segment_stages(total_steps, total_steps / 100,
                        static_cast<std::int64_t>(std::llround(0.6 * static_cast<double>(total_steps))));
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::Apples: return "apples";
    case Quantity::EnvReward: return "env_reward";
    case Quantity::SocioReward: return "socio_reward";
    case Quantity::FireCount: return "fire_count";
    case Quantity::CleanCount: return "clean_count";
  }
  return "?";
}

Quantity parse_quantity(std::string_view s) {
  for (auto q : {Quantity::Apples, Quantity::EnvReward, Quantity::SocioReward, Quantity::FireCount,
                 Quantity::CleanCount})
    if (to_string(q) == s) return q;
  throw std::invalid_argument("unknown quantity '" + std::string(s) + "'");
}

double quantity_of(const AgentEpisodeStats& a, Quantity q) {
  switch (q) {
    case Quantity::Apples: return static_cast<double>(a.apples);
    case Quantity::EnvReward: return a.env_reward;
    case Quantity::SocioReward: return a.socio_reward;
    case Quantity::FireCount: return static_cast<double>(a.fire_count);
    case Quantity::CleanCount: return static_cast<double>(a.clean_count);
  }
  return 0.0;
}

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

std::vector<StageCell> stage_aggregate(std::span<const EpisodeLog> logs, const StageWindows& windows,
                                       Quantity quantity) {
  if (logs.empty()) throw std::invalid_argument("stage_aggregate: no episode logs");
  const std::size_t n = logs.front().agents.size();
  std::vector<StageCell> cells;
  for (int k = 0; k < 3; ++k) {
    std::vector<std::vector<double>> per_agent(n);
    for (const auto& log : logs) {
      if (!windows[k].contains_episode_end(log.step_end)) continue;
      for (std::size_t a = 0; a < n; ++a) per_agent[a].push_back(quantity_of(log.agents[a], quantity));
    }
    if (per_agent.front().empty())
      throw std::invalid_argument("stage " + std::to_string(k + 1) + " window [" +
                                  std::to_string(windows[k].begin) + ", " +
                                  std::to_string(windows[k].end) + ") holds no episode");
    for (std::size_t a = 0; a < n; ++a) {
      const auto& v = per_agent[a];
      StageCell c;
      c.stage = k;
      c.agent = static_cast<int>(a);
      c.episodes = static_cast<std::int64_t>(v.size());
      double sum = 0.0;
      for (double x : v) sum += x;
      c.mean_summed = sum / static_cast<double>(v.size());
      c.median = quantile(v, 0.5);
      c.q1 = quantile(v, 0.25);
      c.q3 = quantile(v, 0.75);
      cells.push_back(c);
    }
  }
  return cells;
}

Distribution summarize(std::span<const std::optional<double>> samples) {
  Distribution d;
  std::vector<double> v;
  for (const auto& s : samples) {
    if (s) v.push_back(*s);
    else ++d.dropped;
  }
  d.count = static_cast<std::int64_t>(v.size());
  if (v.empty()) return d;
  double sum = 0.0;
  for (double x : v) sum += x;
  d.mean = sum / static_cast<double>(v.size());
  d.median = quantile(v, 0.5);
  d.q1 = quantile(v, 0.25);
  d.q3 = quantile(v, 0.75);
  return d;
}

}  // namespace srim
