#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <string>
#include <vector>

#include "json.hpp"
#include "srim/config.hpp"
#include "srim/metrics.hpp"

namespace srim {

inline constexpr const char* kOutputRootEnv = "SRIM_OUTPUT_ROOT";

/// Prefixes a relative path with $SRIM_OUTPUT_ROOT when that variable is set.
std::filesystem::path output_root(const std::filesystem::path& p);

// Episode log CSV: a `# config_hash=<h> seed=<s>` line, a column header, then
// one row per (episode, agent) in episode order.
inline constexpr const char* kEpisodeColumns =
    "seed,episode,agent_id,apples,env_reward,socio_reward,fire_count,clean_count";

void write_episodes_csv(std::ostream& out, std::span<const EpisodeLog> logs, std::string_view config_hash,
                        std::uint64_t seed);

struct EpisodeCsv {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<EpisodeLog> logs;  // step_end left at 0
};

EpisodeCsv read_episodes_csv(std::istream& in);
EpisodeCsv read_episodes_csv(const std::filesystem::path& path);

std::string format_double(double x);

struct RunOutcome {
  std::filesystem::path dir;
  std::filesystem::path report_path;
  nlohmann::json report;
  bool all_ok = true;
};

/// Trains every seed, writes per-seed logs and the run report.
RunOutcome cmd_run(const RunConfig& config, std::ostream& progress);

struct SweepOutcome {
  std::vector<RunOutcome> runs;
  std::filesystem::path comparison_path;
  nlohmann::json comparison;
  bool all_ok = true;
};

/// One run per preset on the base config's topology, then one comparison report.
SweepOutcome cmd_sweep(const RunConfig& base, const std::vector<std::string>& presets, std::ostream& progress);

}  // namespace srim
