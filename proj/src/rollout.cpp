#include <algorithm>
#include <exception>
#include <fstream>
#include <istream>
#include <mutex>
#include <ostream>
#include <optional>
#include <thread>
#include <tuple>

#include "srim/learn.hpp"

namespace srim {

Scenario::Scenario(EnvConfig env_config, GridMap grid, Topology topo, std::optional<IdMapping> ids)
    : env(std::move(env_config)),
      map(std::move(grid)),
      topology(std::move(topo)),
      mapping(ids ? std::move(*ids) : IdMapping::identity(topology.size())),
      structure(analyze(topology)) {
  env.validate();
  if (mapping.size() != topology.size())
    throw std::invalid_argument("id mapping size does not match topology size");
  if (topology.size() > static_cast<int>(map.starts().size()))
    throw std::invalid_argument("map has " + std::to_string(map.starts().size()) +
                                " start cells but the topology has " +
                                std::to_string(topology.size()) + " agents");
}

namespace {

struct EpisodeOutput {
  EpisodeLog log;
  std::vector<AgentTrajectory> trajectories;
};

EpisodeOutput play_episode(const Scenario& sc, const std::vector<Portfolio>& portfolios,
                           std::span<const Learner* const> policies, const RolloutOptions& opt,
                           std::int64_t episode) {
  const int n = sc.num_agents();
  Dilemma env(sc.env, sc.map, n);
  auto obs = env.reset(derive_seed(opt.seed, "env", static_cast<std::uint64_t>(episode)));
  std::vector<Rng> action_rngs;
  action_rngs.reserve(n);
  for (int i = 0; i < n; ++i)
    action_rngs.emplace_back(derive_seed(opt.seed, "act", static_cast<std::uint64_t>(episode),
                                         static_cast<std::uint64_t>(i)));

  EpisodeOutput out;
  out.log.seed = opt.seed;
  out.log.episode = episode;
  out.log.step_end = (episode + 1) * static_cast<std::int64_t>(sc.env.episode_len);
  out.log.agents.assign(n, {});
  if (opt.keep_trajectories) out.trajectories.assign(n, {});

  std::vector<int> actions(n);
  std::vector<std::uint8_t> frozen(n);
  const int frozen_noop = static_cast<int>(Action::Noop);
  while (!env.done()) {
    const int t = env.state().t;
    for (int i = 0; i < n; ++i) {
      actions[i] = policies[i]->act(obs[i], action_rngs[i]);
      frozen[i] = env.state().agents[i].frozen_at(t) ? 1 : 0;
    }
    auto step = env.step(actions);
    ShapedStep shaped;
    if (opt.shaping_enabled) {
      shaped = shape(step.rewards, portfolios);
    } else {
      shaped.env = step.rewards;
      shaped.socio.assign(n, 0.0);
      shaped.total = step.rewards;
    }
    for (int i = 0; i < n; ++i) {
      auto& s = out.log.agents[i];
      s.apples += step.apples[i];
      s.env_reward += shaped.env[i];
      s.socio_reward += shaped.socio[i];
      s.fire_count += step.fired[i];
      s.clean_count += step.cleaned[i];
      if (opt.keep_trajectories) {
        // Frozen agents are logged with the action the env executed.
        const int taken = frozen[i] ? frozen_noop : actions[i];
        out.trajectories[i].push(obs[i], taken, shaped.total[i], shaped.env[i], step.done);
      }
    }
    obs = std::move(step.observations);
  }
  return out;
}

}  // namespace

std::vector<EpisodeLog> merge_logs(std::vector<std::vector<EpisodeLog>> parts) {
  std::vector<EpisodeLog> all;
  for (auto& p : parts) std::move(p.begin(), p.end(), std::back_inserter(all));
  std::sort(all.begin(), all.end(), [](const EpisodeLog& a, const EpisodeLog& b) {
    return std::tie(a.seed, a.episode) < std::tie(b.seed, b.episode);
  });
  return all;
}

RolloutResult rollout(const Scenario& scenario, const PreferenceProfile& profile,
                      std::span<const Learner* const> policies, const RolloutOptions& options) {
  const int n = scenario.num_agents();
  if (options.workers < 1) throw std::invalid_argument("rollout needs at least one worker");
  if (static_cast<int>(policies.size()) != n)
    throw std::invalid_argument("rollout needs one policy per agent");
  const auto portfolios =
      resolve_portfolio(scenario.topology, scenario.structure, profile, scenario.mapping);

  const auto count = static_cast<std::size_t>(std::max<std::int64_t>(0, options.episodes));
  std::vector<std::optional<EpisodeOutput>> slots(count);
  std::vector<std::exception_ptr> errors(options.workers);
  auto work = [&](int w) {
    try {
      for (std::size_t k = w; k < count; k += options.workers)
        slots[k] = play_episode(scenario, portfolios, policies, options,
                                options.first_episode + static_cast<std::int64_t>(k));
    } catch (...) {
      errors[w] = std::current_exception();
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(options.workers, std::max<std::size_t>(count, 1)));
  if (threads == 1) {
    for (int w = 0; w < options.workers; ++w) work(w);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < options.workers; ++w) pool.emplace_back(work, w);
  }

  RolloutResult result;
  for (auto& s : slots)
    if (s) {
      result.logs.push_back(std::move(s->log));
      if (options.keep_trajectories) result.trajectories.push_back(std::move(s->trajectories));
    }
  for (auto& e : errors) {
    if (!e) continue;
    std::string what = "unknown error";
    try {
      std::rethrow_exception(e);
    } catch (const std::exception& ex) {
      what = ex.what();
    } catch (...) {
    }
    throw RolloutError("rollout worker failed: " + what, std::move(result.logs));
  }
  return result;
}

// ------------------------------------------------------------------ trainer

Trainer::Trainer(const Scenario& scenario, PreferenceProfile profile, TrainOptions options)
    : scenario_(scenario), profile_(std::move(profile)), options_(std::move(options)) {
  options_.spec.validate();
  if (options_.workers < 1) throw std::invalid_argument("training needs at least one worker");
  const std::int64_t len = scenario_.env.episode_len;
  if (options_.total_steps < len)
    throw std::invalid_argument("total_steps must cover at least one episode (" +
                                std::to_string(len) + " steps)");
  if (profile_.size() != scenario_.num_agents())
    throw std::invalid_argument("preference profile size does not match agent count");
  total_episodes_ = (options_.total_steps + len - 1) / len;
  for (int i = 0; i < scenario_.num_agents(); ++i)
    learners_.push_back(make_learner(options_.spec, scenario_.env.obs_dim(), scenario_.env.num_actions(),
                                     derive_seed(options_.seed, "learner", static_cast<std::uint64_t>(i))));
}

std::vector<const Learner*> Trainer::policies() const {
  std::vector<const Learner*> p;
  for (const auto& l : learners_) p.push_back(l.get());
  return p;
}

void Trainer::set_profile(PreferenceProfile profile) {
  if (profile.size() != scenario_.num_agents())
    throw std::invalid_argument("preference profile size does not match agent count");
  profile_ = std::move(profile);
}

std::vector<EpisodeLog> Trainer::step_batch() {
  if (finished()) return {};
  RolloutOptions ro;
  ro.workers = options_.workers;
  ro.first_episode = episodes_done_;
  ro.episodes = std::min<std::int64_t>(options_.workers, total_episodes_ - episodes_done_);
  ro.seed = options_.seed;
  ro.shaping_enabled = options_.shaping_enabled;
  ro.keep_trajectories = true;
  const auto pol = policies();
  auto result = rollout(scenario_, profile_, pol, ro);
  episodes_done_ += ro.episodes;

  const int n = scenario_.num_agents();
  for (int i = 0; i < n; ++i) {
    TrajectoryBatch batch;
    for (const auto& ep : result.trajectories) batch.push_back(&ep[i]);
    UpdateRecord rec;
    rec.episode_end = episodes_done_;
    rec.agent = i;
    rec.stats = learners_[i]->update(batch);
    updates_.push_back(rec);
  }

  if (options_.checkpoint_every > 0 && !options_.checkpoint_dir.empty()) {
    const std::int64_t before = episodes_done_ - ro.episodes;
    if (episodes_done_ / options_.checkpoint_every > before / options_.checkpoint_every ||
        finished()) {
      std::filesystem::create_directories(options_.checkpoint_dir);
      save_checkpoint(options_.checkpoint_dir /
                      ("checkpoint_" + std::to_string(episodes_done_) + ".txt"));
    }
  }
  logs_.insert(logs_.end(), result.logs.begin(), result.logs.end());
  return std::move(result.logs);
}

void Trainer::run() {
  while (!finished()) step_batch();
}

void Trainer::save_checkpoint(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path.string() + "'");
  write_checkpoint(out, policies(), options_.config_hash, episodes_done_);
}

TrainResult train(const Scenario& scenario, const PreferenceProfile& profile,
                  const TrainOptions& options) {
  Trainer trainer(scenario, profile, options);
  trainer.run();
  TrainResult r;
  r.learners = std::move(trainer.learners());
  r.logs = trainer.logs();
  r.updates = trainer.updates();
  return r;
}

void write_checkpoint(std::ostream& out, std::span<const Learner* const> learners,
                      std::string_view config_hash, std::int64_t episodes) {
  out << "srim-checkpoint 1\n";
  out << "config_hash " << (config_hash.empty() ? "-" : config_hash) << '\n';
  out << "episodes " << episodes << '\n';
  out << "agents " << learners.size() << '\n';
  for (std::size_t i = 0; i < learners.size(); ++i) {
    out << "agent " << i << ' ' << to_string(learners[i]->kind()) << '\n';
    learners[i]->save(out);
  }
}

void read_checkpoint(std::istream& in, std::span<Learner* const> learners,
                     std::string_view expected_hash) {
  std::string tok, hash;
  int version = 0;
  if (!(in >> tok >> version) || tok != "srim-checkpoint" || version != 1)
    throw std::runtime_error("not a srim checkpoint (version 1)");
  if (!(in >> tok >> hash) || tok != "config_hash") throw std::runtime_error("checkpoint: missing config_hash");
  if (!expected_hash.empty() && hash != expected_hash)
    throw std::runtime_error("checkpoint config hash " + hash + " does not match " +
                             std::string(expected_hash));
  std::int64_t episodes = 0;
  std::size_t agents = 0;
  if (!(in >> tok >> episodes) || tok != "episodes") throw std::runtime_error("checkpoint: missing episodes");
  if (!(in >> tok >> agents) || tok != "agents") throw std::runtime_error("checkpoint: missing agents");
  if (agents != learners.size()) throw std::runtime_error("checkpoint: agent count mismatch");
  for (std::size_t i = 0; i < agents; ++i) {
    std::size_t idx = 0;
    std::string kind;
    if (!(in >> tok >> idx >> kind) || tok != "agent" || idx != i)
      throw std::runtime_error("checkpoint: bad agent header");
    if (kind != to_string(learners[i]->kind())) throw std::runtime_error("checkpoint: learner kind mismatch");
    learners[i]->load(in);
  }
}

}  // namespace srim
