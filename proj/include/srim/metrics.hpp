#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "srim/topology.hpp"

namespace srim {

struct AgentEpisodeStats {
  std::int64_t apples = 0;
  double env_reward = 0.0;
  double socio_reward = 0.0;
  std::int64_t fire_count = 0;
  std::int64_t clean_count = 0;
  bool operator==(const AgentEpisodeStats&) const = default;
};

struct EpisodeLog {
  std::uint64_t seed = 0;
  std::int64_t episode = 0;
  std::int64_t step_end = 0;  // cumulative env steps when the episode finished
  std::vector<AgentEpisodeStats> agents;
  bool operator==(const EpisodeLog&) const = default;
};

enum class RewardBasis { Apples, RawEnv };

struct BciSample {
  std::optional<double> value;  // empty when total reward is zero
  BridgingRange tctr{};
  RewardBasis basis = RewardBasis::Apples;
};

/// Reward-weighted mean of bridging capacities 1 - C_i.
BciSample bci(std::span<const double> rewards, const StructuralProfile& profile,
              RewardBasis basis = RewardBasis::Apples);
BciSample bci(const EpisodeLog& log, const StructuralProfile& profile,
              RewardBasis basis = RewardBasis::Apples);

inline constexpr double kDefaultSciEpsilon = 1e-6;

/// Social contribution index (E + eps) / (E + A + 2 eps).
double sci(double effort, double apples, double epsilon = kDefaultSciEpsilon);

/// Sum of extrinsic rewards over agents.
double utilitarian(const EpisodeLog& log);

// [begin, end) in cumulative env steps.
struct StepWindow {
  std::int64_t begin = 0;
  std::int64_t end = 0;
  // An episode belongs to the window holding its final step.
  bool contains_episode_end(std::int64_t step_end) const {
    return step_end > begin && step_end <= end;
  }
  bool operator==(const StepWindow&) const = default;
};

struct StageWindows {
  StepWindow stage1;
  StepWindow stage2;
  StepWindow stage3;
  const StepWindow& operator[](int k) const { return k == 0 ? stage1 : k == 1 ? stage2 : stage3; }
  bool operator==(const StageWindows&) const = default;
};

// Fraction of the run that forms the final (convergence) stage.
inline constexpr double kConvergenceFraction = 0.4;

/// stage1 = [exploration_end, transient_end / 6), stage2 up to transient_end,
/// stage3 = the last 40% of total_steps.
StageWindows segment_stages(std::int64_t total_steps, std::int64_t exploration_end,
                            std::int64_t transient_end);
/// Proportional defaults: exploration ends at 1%, transient stage at 60%.
StageWindows default_stages(std::int64_t total_steps);

enum class Quantity { Apples, EnvReward, SocioReward, FireCount, CleanCount };

std::string_view to_string(Quantity q);
Quantity parse_quantity(std::string_view s);

double quantity_of(const AgentEpisodeStats& a, Quantity q);

// Type-7 (linear interpolation) sample quantile; `values` need not be sorted.
double quantile(std::vector<double> values, double q);

struct StageCell {
  int stage = 0;  // 0-based
  int agent = 0;
  std::int64_t episodes = 0;
  double mean_summed = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  bool operator==(const StageCell&) const = default;
};

/// Per-agent, per-stage summary of one quantity. Throws std::invalid_argument
/// when a stage window contains no episode.
std::vector<StageCell> stage_aggregate(std::span<const EpisodeLog> logs, const StageWindows& windows,
                                       Quantity quantity);

struct Distribution {
  std::int64_t count = 0;
  std::int64_t dropped = 0;  // missing samples excluded from the summary
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double mean = 0.0;
};

Distribution summarize(std::span<const std::optional<double>> samples);

}  // namespace srim
