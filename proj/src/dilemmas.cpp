#include "srim/dilemmas.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <stdexcept>

namespace srim {

namespace {

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::size_t j = rng.below(i);
    std::swap(v[i - 1], v[j]);
  }
}

Pos operator+(Pos a, Pos b) { return {a.x + b.x, a.y + b.y}; }
Pos operator*(int k, Pos a) { return {k * a.x, k * a.y}; }

Orientation rotate(Orientation o, int quarter_turns) {
  return static_cast<Orientation>((static_cast<int>(o) + quarter_turns + 4) % 4);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument("env config: " + what);
}

}  // namespace

std::string_view to_string(GameKind kind) {
  return kind == GameKind::Harvest ? "harvest" : "cleanup";
}

GameKind parse_game_kind(std::string_view s) {
  if (s == "harvest") return GameKind::Harvest;
  if (s == "cleanup") return GameKind::Cleanup;
  throw std::invalid_argument("unknown game kind '" + std::string(s) + "'");
}

Pos forward_of(Orientation o) {
  switch (o) {
    case Orientation::North: return {0, -1};
    case Orientation::East: return {1, 0};
    case Orientation::South: return {0, 1};
    case Orientation::West: return {-1, 0};
  }
  return {0, 0};
}

Pos right_of(Orientation o) { return forward_of(rotate(o, 1)); }

void EnvConfig::validate() const {
  require(episode_len >= 1, "episode_len must be >= 1");
  require(hit_freeze >= 0, "hit_freeze must be >= 0");
  require(fire_length >= 1 && fire_width >= 1 && fire_width % 2 == 1,
          "fire beam needs length >= 1 and odd width");
  require(clean_length >= 1 && clean_width >= 1 && clean_width % 2 == 1,
          "clean beam needs length >= 1 and odd width");
  require(view_size >= 1 && view_size % 2 == 1, "view_size must be odd and >= 1");
  for (double p : regrowth) require(p >= 0.0 && p <= 1.0, "regrowth probabilities must lie in [0,1]");
  require(regrowth_radius >= 0.0, "regrowth_radius must be >= 0");
  require(initial_apple_fraction >= 0.0 && initial_apple_fraction <= 1.0,
          "initial_apple_fraction must lie in [0,1]");
  require(apple_spawn_rate >= 0.0 && apple_spawn_rate <= 1.0, "apple_spawn_rate must lie in [0,1]");
  require(saturation_threshold > 0.0, "saturation_threshold must be > 0");
  require(waste_spawn_prob >= 0.0 && waste_spawn_prob <= 1.0, "waste_spawn_prob must lie in [0,1]");
  require(waste_cap >= 0.0 && waste_cap <= 1.0, "waste_cap must lie in [0,1]");
  require(initial_waste >= 0.0 && initial_waste <= 1.0, "initial_waste must lie in [0,1]");
}

Dilemma::Dilemma(EnvConfig config, GridMap map, int num_agents)
    : config_(std::move(config)), map_(std::move(map)), num_agents_(num_agents) {
  config_.validate();
  if (num_agents_ < 1) throw std::invalid_argument("need at least one agent");
  if (num_agents_ > static_cast<int>(map_.starts().size()))
    throw std::invalid_argument("map has " + std::to_string(map_.starts().size()) +
                                " start cells but " + std::to_string(num_agents_) +
                                " agents were requested");
  if (config_.kind == GameKind::Cleanup && map_.aquifer().empty())
    throw std::invalid_argument("cleanup map needs at least one aquifer cell");
  if (config_.kind == GameKind::Harvest && !map_.aquifer().empty())
    throw std::invalid_argument("harvest map must not contain aquifer cells");
  occupancy_.assign(static_cast<std::size_t>(map_.width()) * map_.height(), -1);
  reset(0);
}

std::vector<Observation> Dilemma::reset(std::uint64_t seed) {
  state_ = EnvState{};
  state_.rng = Rng(seed);
  state_.episode_len = config_.episode_len;
  Rng& rng = state_.rng;

  auto starts = map_.starts();
  shuffle(starts, rng);
  std::fill(occupancy_.begin(), occupancy_.end(), -1);
  for (int i = 0; i < num_agents_; ++i) {
    AgentBody body;
    body.id = i;
    body.pos = starts[i];
    body.orientation = static_cast<Orientation>(rng.below(4));
    state_.agents.push_back(body);
    occupancy_[map_.index(body.pos)] = i;
  }

  auto place = [&](std::size_t count, double fraction) {
    std::vector<std::uint8_t> flags(count, 0);
    std::vector<std::size_t> order(count);
    std::iota(order.begin(), order.end(), 0);
    shuffle(order, rng);
    const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(count)));
    for (std::size_t i = 0; i < k && i < count; ++i) flags[order[i]] = 1;
    return flags;
  };
  state_.apple_alive = place(map_.spawn_points().size(), config_.initial_apple_fraction);
  state_.waste = place(map_.aquifer().size(),
                       config_.kind == GameKind::Cleanup ? config_.initial_waste : 0.0);
  state_.initial_apples = std::count(state_.apple_alive.begin(), state_.apple_alive.end(), 1);

  std::vector<Observation> obs;
  obs.reserve(num_agents_);
  for (int i = 0; i < num_agents_; ++i) obs.push_back(observe(i));
  return obs;
}

int Dilemma::agent_at(Pos p) const { return map_.inside(p) ? occupancy_[map_.index(p)] : -1; }

int Dilemma::live_apples() const {
  return static_cast<int>(std::count(state_.apple_alive.begin(), state_.apple_alive.end(), 1));
}

double Dilemma::waste_density() const {
  if (state_.waste.empty()) return 0.0;
  return static_cast<double>(std::count(state_.waste.begin(), state_.waste.end(), 1)) /
         static_cast<double>(state_.waste.size());
}

double Dilemma::cleanup_spawn_probability() const {
  return config_.apple_spawn_rate *
         std::max(0.0, 1.0 - waste_density() / config_.saturation_threshold);
}

StepOutcome Dilemma::step(std::span<const int> actions) {
  if (done()) throw std::logic_error("step called on a finished episode");
  if (static_cast<int>(actions.size()) != num_agents_)
    throw std::invalid_argument("expected " + std::to_string(num_agents_) + " actions, got " +
                                std::to_string(actions.size()));
  const int t = state_.t;
  std::vector<int> act(actions.begin(), actions.end());
  for (int i = 0; i < num_agents_; ++i) {
    if (act[i] < 0 || act[i] >= num_actions())
      throw std::invalid_argument("unknown action id " + std::to_string(act[i]) + " for agent " +
                                  std::to_string(i));
    if (state_.agents[i].frozen_at(t)) act[i] = static_cast<int>(Action::Noop);
  }

  StepOutcome out;
  out.rewards.assign(num_agents_, 0.0);
  out.apples.assign(num_agents_, 0);
  out.fired.assign(num_agents_, 0);
  out.hits_taken.assign(num_agents_, 0);
  out.cleaned.assign(num_agents_, 0);

  for (int i = 0; i < num_agents_; ++i) {
    auto& a = state_.agents[i];
    if (act[i] == static_cast<int>(Action::RotateLeft)) a.orientation = rotate(a.orientation, -1);
    if (act[i] == static_cast<int>(Action::RotateRight)) a.orientation = rotate(a.orientation, 1);
  }
  move_agents(act);

  for (int i = 0; i < num_agents_; ++i) {
    const int s = map_.spawn_index(state_.agents[i].pos);
    if (s >= 0 && state_.apple_alive[s]) {
      state_.apple_alive[s] = 0;
      out.apples[i] += 1;
    }
  }

  fire_beams(act, out);
  if (config_.kind == GameKind::Cleanup) clean_beams(act, out);

  for (int i = 0; i < num_agents_; ++i)
    out.rewards[i] = config_.apple_reward * out.apples[i] -
                     config_.fire_cost * (out.fired[i] ? 1.0 : 0.0) -
                     config_.hit_penalty * out.hits_taken[i];

  regrow(out);

  ++state_.t;
  out.done = done();
  out.observations.reserve(num_agents_);
  for (int i = 0; i < num_agents_; ++i) out.observations.push_back(observe(i));
  return out;
}

void Dilemma::move_agents(const std::vector<int>& act) {
  const int n = num_agents_;
  std::vector<Pos> target(n);
  for (int i = 0; i < n; ++i) {
    const auto& a = state_.agents[i];
    Pos delta{0, 0};
    switch (static_cast<Action>(act[i])) {
      case Action::Forward: delta = forward_of(a.orientation); break;
      case Action::Backward: delta = -1 * forward_of(a.orientation); break;
      case Action::StepLeft: delta = -1 * right_of(a.orientation); break;
      case Action::StepRight: delta = right_of(a.orientation); break;
      default: break;
    }
    const Pos next = a.pos + delta;
    target[i] = map_.walkable(next) ? next : a.pos;
  }
  auto moving = [&](int i) { return !(target[i] == state_.agents[i].pos); };

  // Several movers claiming one cell: a seeded uniform winner, the rest stay.
  std::map<int, std::vector<int>> claims;
  for (int i = 0; i < n; ++i)
    if (moving(i)) claims[map_.index(target[i])].push_back(i);
  for (auto& [cell, who] : claims) {
    if (who.size() < 2) continue;
    const auto winner = who[state_.rng.below(who.size())];
    for (int i : who)
      if (i != winner) target[i] = state_.agents[i].pos;
  }

  // Block moves into cells held by agents that stay put, and head-on swaps.
  bool changed = true;
  while (changed) {
    changed = false;
    for (int i = 0; i < n; ++i) {
      if (!moving(i)) continue;
      const int j = agent_at(target[i]);
      if (j < 0) continue;
      if (!moving(j) || target[j] == state_.agents[i].pos) {
        target[i] = state_.agents[i].pos;
        changed = true;
      }
    }
  }

  for (int i = 0; i < n; ++i) occupancy_[map_.index(state_.agents[i].pos)] = -1;
  for (int i = 0; i < n; ++i) {
    state_.agents[i].pos = target[i];
    occupancy_[map_.index(target[i])] = i;
  }
}

void Dilemma::fire_beams(const std::vector<int>& act, StepOutcome& out) {
  const int t = state_.t;
  std::vector<int> hit_by(num_agents_, 0);
  for (int i = 0; i < num_agents_; ++i) {
    if (act[i] != static_cast<int>(Action::Fire)) continue;
    out.fired[i] = 1;
    const auto& a = state_.agents[i];
    const Pos fwd = forward_of(a.orientation);
    const Pos right = right_of(a.orientation);
    const int half = config_.fire_width / 2;
    for (int lane = -half; lane <= half; ++lane) {
      Pos p = a.pos + lane * right;
      if (lane != 0 && !map_.walkable(p)) continue;
      for (int step = 1; step <= config_.fire_length; ++step) {
        p = p + fwd;
        if (!map_.walkable(p)) break;
        const int j = agent_at(p);
        // Frozen agents are out of play and do not stop the beam.
        if (j >= 0 && j != i && !state_.agents[j].frozen_at(t)) {
          hit_by[j] += 1;
          break;
        }
      }
    }
  }
  for (int j = 0; j < num_agents_; ++j) {
    if (hit_by[j] == 0) continue;
    out.hits_taken[j] = hit_by[j];
    auto& body = state_.agents[j];
    body.frozen_until = std::max(body.frozen_until, t + 1 + config_.hit_freeze);
  }
}

void Dilemma::clean_beams(const std::vector<int>& act, StepOutcome& out) {
  for (int i = 0; i < num_agents_; ++i) {
    if (act[i] != static_cast<int>(Action::Clean)) continue;
    out.cleaned[i] = 1;
    const auto& a = state_.agents[i];
    const Pos fwd = forward_of(a.orientation);
    const Pos right = right_of(a.orientation);
    const int half = config_.clean_width / 2;
    for (int lane = -half; lane <= half; ++lane) {
      Pos p = a.pos + lane * right;
      if (lane != 0 && !map_.walkable(p)) continue;
      for (int step = 1; step <= config_.clean_length; ++step) {
        p = p + fwd;
        if (!map_.walkable(p)) break;
        const int w = map_.aquifer_index(p);
        if (w >= 0 && state_.waste[w]) {
          state_.waste[w] = 0;
          ++out.waste_removed;
        }
      }
    }
  }
}

void Dilemma::regrow(StepOutcome& out) {
  const auto& spawns = map_.spawn_points();
  Rng& rng = state_.rng;
  if (config_.kind == GameKind::Harvest) {
    const auto alive = state_.apple_alive;
    const double r2 = config_.regrowth_radius * config_.regrowth_radius;
    for (std::size_t s = 0; s < spawns.size(); ++s) {
      if (alive[s] || agent_at(spawns[s]) >= 0) continue;
      int k = 0;
      for (std::size_t q = 0; q < spawns.size(); ++q) {
        if (!alive[q]) continue;
        const double dx = spawns[q].x - spawns[s].x;
        const double dy = spawns[q].y - spawns[s].y;
        if (dx * dx + dy * dy <= r2) ++k;
      }
      const double p = k == 0 ? config_.regrowth[0]
                       : k <= 2 ? config_.regrowth[1]
                       : k <= 4 ? config_.regrowth[2]
                                : config_.regrowth[3];
      if (p > 0.0 && rng.bernoulli(p)) {
        state_.apple_alive[s] = 1;
        ++state_.revivals;
        ++out.apples_spawned;
      }
    }
    return;
  }

  const double p = cleanup_spawn_probability();
  if (p > 0.0) {
    for (std::size_t s = 0; s < spawns.size(); ++s) {
      if (state_.apple_alive[s] || agent_at(spawns[s]) >= 0) continue;
      if (rng.bernoulli(p)) {
        state_.apple_alive[s] = 1;
        ++state_.revivals;
        ++out.apples_spawned;
      }
    }
  }
  if (waste_density() < config_.waste_cap && config_.waste_spawn_prob > 0.0) {
    for (auto& w : state_.waste)
      if (!w && rng.bernoulli(config_.waste_spawn_prob)) w = 1;
  }
}

Observation Dilemma::observe(int agent) const {
  Observation obs(static_cast<std::size_t>(obs_dim()), 0.0f);
  observe_into(agent, obs);
  return obs;
}

void Dilemma::observe_into(int agent, std::span<float> out) const {
  if (agent < 0 || agent >= num_agents_)
    throw std::invalid_argument("unknown agent id " + std::to_string(agent));
  if (static_cast<int>(out.size()) != obs_dim())
    throw std::invalid_argument("observation buffer has wrong size");
  std::fill(out.begin(), out.end(), 0.0f);
  const auto& self = state_.agents[agent];
  const Pos fwd = forward_of(self.orientation);
  const Pos right = right_of(self.orientation);
  const int v = config_.view_size;
  const int half = v / 2;
  for (int r = 0; r < v; ++r) {
    for (int c = 0; c < v; ++c) {
      const Pos p = self.pos + (half - r) * fwd + (c - half) * right;
      float* cell = out.data() + (static_cast<std::size_t>(r) * v + c) * kNumChannels;
      if (!map_.walkable(p)) {
        cell[kWall] = 1.0f;
        continue;
      }
      const int s = map_.spawn_index(p);
      if (s >= 0 && state_.apple_alive[s]) cell[kApple] = 1.0f;
      const int w = map_.aquifer_index(p);
      if (w >= 0 && state_.waste[w]) cell[kWaste] = 1.0f;
      const int j = agent_at(p);
      if (j == agent) cell[kSelf] = 1.0f;
      else if (j >= 0) cell[kOtherAgent] = 1.0f;
    }
  }
}

}  // namespace srim
