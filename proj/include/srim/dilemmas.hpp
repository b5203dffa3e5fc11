#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "srim/gridmap.hpp"
#include "srim/rng.hpp"

namespace srim {

enum class GameKind { Harvest, Cleanup };

std::string_view to_string(GameKind kind);
GameKind parse_game_kind(std::string_view s);

enum class Action : int {
  Forward = 0,
  Backward = 1,
  StepLeft = 2,
  StepRight = 3,
  RotateLeft = 4,
  RotateRight = 5,
  Fire = 6,
  Noop = 7,
  Clean = 8,  // Cleanup only
};

inline constexpr int kHarvestActions = 8;
inline constexpr int kCleanupActions = 9;

enum class Orientation : int { North = 0, East = 1, South = 2, West = 3 };

// Observation channels, in storage order.
enum Channel : int { kWall = 0, kApple, kWaste, kOtherAgent, kSelf, kNumChannels };

struct EnvConfig {
  GameKind kind = GameKind::Harvest;
  int episode_len = 1000;
  double apple_reward = 1.0;
  double fire_cost = 1.0;
  double hit_penalty = 50.0;
  int hit_freeze = 25;
  int fire_length = 5;
  int fire_width = 1;
  int clean_length = 3;
  int clean_width = 3;
  int view_size = 7;
  // Harvest revival probability for k live apples within the radius:
  // k = 0, 1-2, 3-4, >= 5.
  std::array<double, 4> regrowth{0.0, 0.005, 0.02, 0.05};
  double regrowth_radius = 2.0;
  double initial_apple_fraction = 1.0;
  // Cleanup
  double apple_spawn_rate = 0.05;
  double saturation_threshold = 0.4;
  double waste_spawn_prob = 0.01;
  double waste_cap = 1.0;
  double initial_waste = 0.3;

  int num_actions() const { return kind == GameKind::Harvest ? kHarvestActions : kCleanupActions; }
  int obs_dim() const { return view_size * view_size * kNumChannels; }
  // Throws std::invalid_argument on out-of-range values.
  void validate() const;
  bool operator==(const EnvConfig&) const = default;
};

struct AgentBody {
  int id = 0;
  Pos pos;
  Orientation orientation = Orientation::North;
  int frozen_until = 0;  // actions at ticks t < frozen_until are coerced to noop

  bool frozen_at(int t) const { return t < frozen_until; }
  bool operator==(const AgentBody&) const = default;
};

struct EnvState {
  int t = 0;
  int episode_len = 0;
  std::vector<AgentBody> agents;
  std::vector<std::uint8_t> apple_alive;  // per map spawn point
  std::vector<std::uint8_t> waste;        // per map aquifer cell
  Rng rng{0};
  std::int64_t initial_apples = 0;
  std::int64_t revivals = 0;

  bool operator==(const EnvState&) const = default;
};

using Observation = std::vector<float>;

struct StepOutcome {
  std::vector<double> rewards;  // extrinsic r_env per agent
  std::vector<int> apples;      // apples collected this tick
  std::vector<std::uint8_t> fired;
  std::vector<int> hits_taken;  // beams that hit the agent this tick
  std::vector<std::uint8_t> cleaned;
  std::vector<Observation> observations;
  int waste_removed = 0;
  int apples_spawned = 0;
  bool done = false;
};

// A Harvest or Cleanup game instance. Single-writer: one thread steps it.
class Dilemma {
 public:
  Dilemma(EnvConfig config, GridMap map, int num_agents);

  std::vector<Observation> reset(std::uint64_t seed);

  // Actions are integer ids of `Action`; frozen agents' actions become noop.
  StepOutcome step(std::span<const int> actions);

  Observation observe(int agent) const;
  void observe_into(int agent, std::span<float> out) const;

  const EnvState& state() const { return state_; }
  const EnvConfig& config() const { return config_; }
  const GridMap& map() const { return map_; }
  int num_agents() const { return num_agents_; }
  int num_actions() const { return config_.num_actions(); }
  int obs_dim() const { return config_.obs_dim(); }
  bool done() const { return state_.t >= state_.episode_len; }

  int live_apples() const;
  double waste_density() const;
  // Cleanup apple spawn probability for the current waste density.
  double cleanup_spawn_probability() const;

 private:
  void move_agents(const std::vector<int>& actions);
  void fire_beams(const std::vector<int>& actions, StepOutcome& out);
  void clean_beams(const std::vector<int>& actions, StepOutcome& out);
  void regrow(StepOutcome& out);
  int agent_at(Pos p) const;

  EnvConfig config_;
  GridMap map_;
  int num_agents_;
  EnvState state_;
  std::vector<int> occupancy_;  // cell -> agent id or -1
};

Pos forward_of(Orientation o);
Pos right_of(Orientation o);

}  // namespace srim
