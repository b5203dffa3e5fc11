#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "srim/dilemmas.hpp"
#include "srim/metrics.hpp"
#include "srim/rng.hpp"
#include "srim/shaping.hpp"
#include "srim/topology.hpp"

namespace srim {

enum class PolicyKind { ScriptedRandom, ScriptedStill, TabularQ, ActorCritic };

std::string_view to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view s);

struct PolicySpec {
  PolicyKind kind = PolicyKind::ActorCritic;
  int hidden_size = 64;
  double learning_rate = 1e-3;
  double entropy_coef = 0.01;
  double gamma = 0.99;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  // Tabular-Q exploration: linear decay over `epsilon_decay_episodes`.
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  int epsilon_decay_episodes = 200;

  void validate() const;
  bool operator==(const PolicySpec&) const = default;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One agent's view of one episode.
struct AgentTrajectory {
  int obs_dim = 0;
  std::vector<float> obs;  // size() * obs_dim
  std::vector<int> actions;
  std::vector<double> r_tot;
  std::vector<double> r_env;
  std::vector<std::uint8_t> done;

  std::size_t size() const { return actions.size(); }
  std::span<const float> observation(std::size_t t) const {
    return {obs.data() + t * static_cast<std::size_t>(obs_dim), static_cast<std::size_t>(obs_dim)};
  }
  void push(std::span<const float> o, int action, double total, double env, bool terminal);
};

using TrajectoryBatch = std::vector<const AgentTrajectory*>;

struct UpdateStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  std::int64_t samples = 0;
};

// Independent per-agent learner. `act` must be safe to call concurrently.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual PolicyKind kind() const = 0;
  virtual int act(std::span<const float> obs, Rng& rng) const = 0;
  // Learns from this agent's own trajectories only.
  virtual UpdateStats update(const TrajectoryBatch& batch) = 0;
  virtual void save(std::ostream& out) const = 0;
  virtual void load(std::istream& in) = 0;
};

std::unique_ptr<Learner> make_learner(const PolicySpec& spec, int obs_dim, int num_actions,
                                      std::uint64_t seed);

class ScriptedRandom final : public Learner {
 public:
  explicit ScriptedRandom(int num_actions) : num_actions_(num_actions) {}
  PolicyKind kind() const override { return PolicyKind::ScriptedRandom; }
  int act(std::span<const float>, Rng& rng) const override {
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_actions_)));
  }
  UpdateStats update(const TrajectoryBatch&) override { return {}; }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

 private:
  int num_actions_;
};

class ScriptedStill final : public Learner {
 public:
  PolicyKind kind() const override { return PolicyKind::ScriptedStill; }
  int act(std::span<const float>, Rng&) const override { return static_cast<int>(Action::Noop); }
  UpdateStats update(const TrajectoryBatch&) override { return {}; }
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;
};

// Epsilon-greedy Q-learning over hashed observations.
class TabularQ final : public Learner {
 public:
  TabularQ(const PolicySpec& spec, int num_actions);
  PolicyKind kind() const override { return PolicyKind::TabularQ; }
  int act(std::span<const float> obs, Rng& rng) const override;
  UpdateStats update(const TrajectoryBatch& batch) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  double epsilon() const;
  std::size_t table_size() const { return table_.size(); }
  static std::uint64_t key(std::span<const float> obs);

 private:
  PolicySpec spec_;
  int num_actions_;
  std::int64_t episodes_seen_ = 0;
  std::unordered_map<std::uint64_t, std::vector<double>> table_;
};

// Advantage actor-critic: one tanh hidden layer shared by a softmax policy
// head and a scalar value head, trained with Adam on discounted returns.
class ActorCritic final : public Learner {
 public:
  ActorCritic(const PolicySpec& spec, int obs_dim, int num_actions, std::uint64_t seed);
  PolicyKind kind() const override { return PolicyKind::ActorCritic; }
  int act(std::span<const float> obs, Rng& rng) const override;
  UpdateStats update(const TrajectoryBatch& batch) override;
  void save(std::ostream& out) const override;
  void load(std::istream& in) override;

  std::vector<double> action_probabilities(std::span<const float> obs) const;
  double value(std::span<const float> obs) const;

  // Discounted returns, reset at terminal steps, concatenated over the batch.
  std::vector<double> returns(const TrajectoryBatch& batch) const;

  // Loss with advantages and returns held fixed:
  // mean_t [ -A_t log pi(a_t|o_t) - c_ent H(pi(.|o_t)) + c_v (G_t - V(o_t))^2 / 2 ].
  double surrogate(const TrajectoryBatch& batch, std::span<const double> advantages,
                   std::span<const double> returns) const;
  std::vector<double> surrogate_gradient(const TrajectoryBatch& batch,
                                         std::span<const double> advantages,
                                         std::span<const double> returns) const;

  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

 private:
  struct Forward {
    std::vector<double> hidden;
    std::vector<double> probs;
    double value = 0.0;
  };
  Forward forward(std::span<const float> obs) const;
  double loss_and_gradient(const TrajectoryBatch& batch, std::span<const double> advantages,
                           std::span<const double> returns, std::vector<double>* grad,
                           UpdateStats* stats) const;

  PolicySpec spec_;
  int obs_dim_;
  int num_actions_;
  int hidden_;
  std::size_t w1_, b1_, wp_, bp_, wv_, bv_;  // offsets into params_
  std::vector<double> params_;
  std::vector<double> adam_m_, adam_v_;
  std::int64_t adam_step_ = 0;
};

// Environment, topology and agent/vertex mapping shared by a run.
struct Scenario {
  Scenario(EnvConfig env, GridMap map, Topology topology, std::optional<IdMapping> mapping = {});

  EnvConfig env;
  GridMap map;
  Topology topology;
  IdMapping mapping;
  StructuralProfile structure;

  int num_agents() const { return topology.size(); }
};

struct RolloutOptions {
  int workers = 4;
  std::int64_t first_episode = 0;
  std::int64_t episodes = 1;
  std::uint64_t seed = 0;
  bool shaping_enabled = true;
  bool keep_trajectories = false;
};

struct RolloutResult {
  std::vector<EpisodeLog> logs;  // ordered by episode index
  std::vector<std::vector<AgentTrajectory>> trajectories;  // [episode][agent]
};

// A worker failed; `partial` holds every episode that completed.
class RolloutError : public std::runtime_error {
 public:
  RolloutError(const std::string& what, std::vector<EpisodeLog> partial)
      : std::runtime_error(what), partial(std::move(partial)) {}
  std::vector<EpisodeLog> partial;
};

/// Plays `episodes` episodes on independent env instances spread over
/// worker threads. Episode k uses streams derived from (seed, k) only, so the
/// merged logs do not depend on the worker count.
RolloutResult rollout(const Scenario& scenario, const PreferenceProfile& profile,
                      std::span<const Learner* const> policies, const RolloutOptions& options);

/// Merges worker outputs into episode order.
std::vector<EpisodeLog> merge_logs(std::vector<std::vector<EpisodeLog>> parts);

struct TrainOptions {
  PolicySpec spec;
  int workers = 4;
  std::uint64_t seed = 0;
  std::int64_t total_steps = 0;
  bool shaping_enabled = true;
  int checkpoint_every = 50;  // episodes; 0 disables
  std::filesystem::path checkpoint_dir;  // empty: no checkpoint files
  std::string config_hash;
};

struct UpdateRecord {
  std::int64_t episode_end = 0;  // episodes completed when the update ran
  int agent = 0;
  UpdateStats stats;
};

// Synchronous training: each batch plays `workers` episodes with the current
// policies, then every agent's learner updates on its own trajectories.
class Trainer {
 public:
  Trainer(const Scenario& scenario, PreferenceProfile profile, TrainOptions options);

  std::int64_t total_episodes() const { return total_episodes_; }
  std::int64_t episodes_done() const { return episodes_done_; }
  bool finished() const { return episodes_done_ >= total_episodes_; }

  // Plays and learns one batch; returns the batch's episode logs.
  std::vector<EpisodeLog> step_batch();
  void run();

  // Takes effect from the next batch, i.e. at an episode boundary.
  void set_profile(PreferenceProfile profile);
  const PreferenceProfile& profile() const { return profile_; }

  const std::vector<EpisodeLog>& logs() const { return logs_; }
  const std::vector<UpdateRecord>& updates() const { return updates_; }
  std::vector<std::unique_ptr<Learner>>& learners() { return learners_; }
  std::vector<const Learner*> policies() const;

  void save_checkpoint(const std::filesystem::path& path) const;

 private:
  const Scenario& scenario_;
  PreferenceProfile profile_;
  TrainOptions options_;
  std::int64_t total_episodes_;
  std::int64_t episodes_done_ = 0;
  std::vector<std::unique_ptr<Learner>> learners_;
  std::vector<EpisodeLog> logs_;
  std::vector<UpdateRecord> updates_;
};

struct TrainResult {
  std::vector<std::unique_ptr<Learner>> learners;
  std::vector<EpisodeLog> logs;
  std::vector<UpdateRecord> updates;
};

TrainResult train(const Scenario& scenario, const PreferenceProfile& profile,
                  const TrainOptions& options);

/// Writes/reads the learners of one run. The header carries the config hash;
/// loading checks it when `expected_hash` is non-empty.
void write_checkpoint(std::ostream& out, std::span<const Learner* const> learners,
                      std::string_view config_hash, std::int64_t episodes);
void read_checkpoint(std::istream& in, std::span<Learner* const> learners,
                     std::string_view expected_hash = {});

struct PbtConfig {
  int population = 4;
  double perturb = 1.2;
  int exploit_interval = 10;  // episodes
  double quantile = 0.25;
  void validate() const;
};

struct PbtMember {
  PreferenceProfile profile;
  double objective = 0.0;  // mean utilitarian return over the last interval
};

/// One exploit/explore round. Each bottom-quantile member copies the weights
/// of a uniformly drawn top-quantile member when that member is strictly
/// better, then multiplies every weight by `perturb` or its inverse.
std::vector<PreferenceProfile> pbt_schedule(const PbtConfig& config, std::span<const PbtMember> members,
                                            Rng& rng);

struct PbtRun {
  std::vector<TrainResult> members;
  // profiles[r][k]: member k's profile in force after round r (round 0 = initial).
  std::vector<std::vector<PreferenceProfile>> profiles;
};

PbtRun run_pbt(const Scenario& scenario, const PreferenceProfile& initial, const TrainOptions& options,
               const PbtConfig& config);

}  // namespace srim
