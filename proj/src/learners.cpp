#include <algorithm>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "srim/learn.hpp"

namespace srim {

namespace {

void expect_token(std::istream& in, std::string_view want) {
  std::string got;
  if (!(in >> got) || got != want)
    throw std::runtime_error("checkpoint: expected '" + std::string(want) + "', got '" + got + "'");
}

template <typename T>
T read_value(std::istream& in, std::string_view what) {
  T v{};
  if (!(in >> v)) throw std::runtime_error("checkpoint: cannot read " + std::string(what));
  return v;
}

void write_doubles(std::ostream& out, const std::vector<double>& v) {
  out << v.size();
  for (double x : v) out << ' ' << x;
  out << '\n';
}

std::vector<double> read_doubles(std::istream& in, std::size_t expected, std::string_view what) {
  const auto n = read_value<std::size_t>(in, what);
  if (n != expected) throw std::runtime_error("checkpoint: " + std::string(what) + " size mismatch");
  std::vector<double> v(n);
  for (auto& x : v) x = read_value<double>(in, what);
  return v;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::ScriptedRandom: return "scripted-random";
    case PolicyKind::ScriptedStill: return "scripted-still";
    case PolicyKind::TabularQ: return "tabular-q";
    case PolicyKind::ActorCritic: return "actor-critic";
  }
  return "?";
}

PolicyKind parse_policy_kind(std::string_view s) {
  for (auto k : {PolicyKind::ScriptedRandom, PolicyKind::ScriptedStill, PolicyKind::TabularQ,
                 PolicyKind::ActorCritic})
    if (to_string(k) == s) return k;
  throw std::invalid_argument("unknown policy kind '" + std::string(s) + "'");
}

void PolicySpec::validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("policy: gamma must lie in [0,1]");
  if (hidden_size < 1) throw std::invalid_argument("policy: hidden_size must be >= 1");
  if (!(learning_rate >= 0.0)) throw std::invalid_argument("policy: learning_rate must be >= 0");
  if (!(entropy_coef >= 0.0)) throw std::invalid_argument("policy: entropy_coef must be >= 0");
  if (!(value_coef >= 0.0)) throw std::invalid_argument("policy: value_coef must be >= 0");
  if (!(max_grad_norm > 0.0)) throw std::invalid_argument("policy: max_grad_norm must be > 0");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw std::invalid_argument("policy: epsilon must lie in [0,1]");
  if (epsilon_decay_episodes < 0) throw std::invalid_argument("policy: epsilon_decay_episodes must be >= 0");
}

void AgentTrajectory::push(std::span<const float> o, int action, double total, double env,
                           bool terminal) {
  if (obs_dim == 0) obs_dim = static_cast<int>(o.size());
  obs.insert(obs.end(), o.begin(), o.end());
  actions.push_back(action);
  r_tot.push_back(total);
  r_env.push_back(env);
  done.push_back(terminal ? 1 : 0);
}

std::unique_ptr<Learner> make_learner(const PolicySpec& spec, int obs_dim, int num_actions,
                                      std::uint64_t seed) {
  spec.validate();
  switch (spec.kind) {
    case PolicyKind::ScriptedRandom: return std::make_unique<ScriptedRandom>(num_actions);
    case PolicyKind::ScriptedStill: return std::make_unique<ScriptedStill>();
    case PolicyKind::TabularQ: return std::make_unique<TabularQ>(spec, num_actions);
    case PolicyKind::ActorCritic:
      return std::make_unique<ActorCritic>(spec, obs_dim, num_actions, seed);
  }
  throw std::invalid_argument("unsupported policy kind");
}

void ScriptedRandom::save(std::ostream& out) const { out << "actions " << num_actions_ << '\n'; }
void ScriptedRandom::load(std::istream& in) {
  expect_token(in, "actions");
  if (read_value<int>(in, "actions") != num_actions_)
    throw std::runtime_error("checkpoint: action count mismatch");
}
void ScriptedStill::save(std::ostream& out) const { out << "still\n"; }
void ScriptedStill::load(std::istream& in) { expect_token(in, "still"); }

// ---------------------------------------------------------------- tabular Q

TabularQ::TabularQ(const PolicySpec& spec, int num_actions)
    : spec_(spec), num_actions_(num_actions) {}

std::uint64_t TabularQ::key(std::span<const float> obs) {
  return fnv1a(std::string_view(reinterpret_cast<const char*>(obs.data()), obs.size_bytes()));
}

double TabularQ::epsilon() const {
  if (spec_.epsilon_decay_episodes == 0) return spec_.epsilon_end;
  const double frac =
      std::min(1.0, static_cast<double>(episodes_seen_) / spec_.epsilon_decay_episodes);
  return spec_.epsilon_start + frac * (spec_.epsilon_end - spec_.epsilon_start);
}

int TabularQ::act(std::span<const float> obs, Rng& rng) const {
  if (rng.uniform() < epsilon())
    return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_actions_)));
  auto it = table_.find(key(obs));
  if (it == table_.end()) return static_cast<int>(rng.below(static_cast<std::uint64_t>(num_actions_)));
  const auto& q = it->second;
  const double best = *std::max_element(q.begin(), q.end());
  std::vector<int> ties;
  for (int a = 0; a < num_actions_; ++a)
    if (q[a] == best) ties.push_back(a);
  return ties[rng.below(ties.size())];
}

UpdateStats TabularQ::update(const TrajectoryBatch& batch) {
  UpdateStats stats;
  const double lr = spec_.learning_rate;
  for (const auto* traj : batch) {
    // Backward sweep so a reward propagates through the episode in one pass.
    for (std::size_t k = traj->size(); k-- > 0;) {
      auto& q = table_[key(traj->observation(k))];
      if (q.empty()) q.assign(num_actions_, 0.0);
      double target = traj->r_tot[k];
      if (!traj->done[k] && k + 1 < traj->size()) {
        auto it = table_.find(key(traj->observation(k + 1)));
        if (it != table_.end()) target += spec_.gamma * *std::max_element(it->second.begin(), it->second.end());
      }
      const double td = target - q[traj->actions[k]];
      q[traj->actions[k]] += lr * td;
      stats.value_loss += 0.5 * td * td;
      ++stats.samples;
    }
    ++episodes_seen_;
  }
  if (stats.samples > 0) stats.value_loss /= static_cast<double>(stats.samples);
  if (!std::isfinite(stats.value_loss))
    throw TrainingDiverged("tabular-q: non-finite TD error");
  return stats;
}

void TabularQ::save(std::ostream& out) const {
  std::vector<std::uint64_t> keys;
  for (const auto& [k, v] : table_) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  const auto old = out.precision(17);
  out << "actions " << num_actions_ << " episodes " << episodes_seen_ << " entries " << keys.size()
      << '\n';
  for (auto k : keys) {
    out << k;
    for (double x : table_.at(k)) out << ' ' << x;
    out << '\n';
  }
  out.precision(old);
}

void TabularQ::load(std::istream& in) {
  expect_token(in, "actions");
  if (read_value<int>(in, "actions") != num_actions_)
    throw std::runtime_error("checkpoint: action count mismatch");
  expect_token(in, "episodes");
  episodes_seen_ = read_value<std::int64_t>(in, "episodes");
  expect_token(in, "entries");
  const auto n = read_value<std::size_t>(in, "entries");
  table_.clear();
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = read_value<std::uint64_t>(in, "key");
    std::vector<double> q(num_actions_);
    for (auto& x : q) x = read_value<double>(in, "q");
    table_.emplace(k, std::move(q));
  }
}

// ------------------------------------------------------------ actor-critic

ActorCritic::ActorCritic(const PolicySpec& spec, int obs_dim, int num_actions, std::uint64_t seed)
    : spec_(spec), obs_dim_(obs_dim), num_actions_(num_actions), hidden_(spec.hidden_size) {
  const std::size_t d = obs_dim_, h = hidden_, a = num_actions_;
  w1_ = 0;
  b1_ = w1_ + h * d;
  wp_ = b1_ + h;
  bp_ = wp_ + a * h;
  wv_ = bp_ + a;
  bv_ = wv_ + h;
  params_.assign(bv_ + 1, 0.0);
  Rng rng(seed);
  const double s1 = 1.0 / std::sqrt(static_cast<double>(d));
  const double s2 = 1.0 / std::sqrt(static_cast<double>(h));
  for (std::size_t i = 0; i < h * d; ++i) params_[w1_ + i] = rng.normal() * s1;
  // Small policy head keeps the initial policy close to uniform.
  for (std::size_t i = 0; i < a * h; ++i) params_[wp_ + i] = rng.normal() * s2 * 0.01;
  for (std::size_t i = 0; i < h; ++i) params_[wv_ + i] = rng.normal() * s2;
  adam_m_.assign(params_.size(), 0.0);
  adam_v_.assign(params_.size(), 0.0);
}

ActorCritic::Forward ActorCritic::forward(std::span<const float> obs) const {
  if (static_cast<int>(obs.size()) != obs_dim_)
    throw std::invalid_argument("actor-critic: observation has wrong dimension");
  Forward f;
  f.hidden.resize(hidden_);
  const double* w1 = params_.data() + w1_;
  for (int j = 0; j < hidden_; ++j) {
    const double* row = w1 + static_cast<std::size_t>(j) * obs_dim_;
    double u = params_[b1_ + j];
    for (int k = 0; k < obs_dim_; ++k)
      if (obs[k] != 0.0f) u += row[k] * obs[k];
    f.hidden[j] = std::tanh(u);
  }
  f.probs.resize(num_actions_);
  double top = -INFINITY;
  for (int a = 0; a < num_actions_; ++a) {
    double z = params_[bp_ + a];
    const double* row = params_.data() + wp_ + static_cast<std::size_t>(a) * hidden_;
    for (int j = 0; j < hidden_; ++j) z += row[j] * f.hidden[j];
    f.probs[a] = z;
    top = std::max(top, z);
  }
  double norm = 0.0;
  for (double& p : f.probs) {
    p = std::exp(p - top);
    norm += p;
  }
  for (double& p : f.probs) p /= norm;
  f.value = params_[bv_];
  for (int j = 0; j < hidden_; ++j) f.value += params_[wv_ + j] * f.hidden[j];
  return f;
}

std::vector<double> ActorCritic::action_probabilities(std::span<const float> obs) const {
  return forward(obs).probs;
}

double ActorCritic::value(std::span<const float> obs) const { return forward(obs).value; }

int ActorCritic::act(std::span<const float> obs, Rng& rng) const {
  const auto probs = forward(obs).probs;
  double u = rng.uniform();
  for (int a = 0; a < num_actions_; ++a) {
    u -= probs[a];
    if (u < 0.0) return a;
  }
  return num_actions_ - 1;
}

std::vector<double> ActorCritic::returns(const TrajectoryBatch& batch) const {
  std::vector<double> out;
  for (const auto* traj : batch) {
    std::vector<double> g(traj->size());
    double running = 0.0;
    for (std::size_t k = traj->size(); k-- > 0;) {
      if (traj->done[k]) running = 0.0;
      running = traj->r_tot[k] + spec_.gamma * running;
      g[k] = running;
    }
    out.insert(out.end(), g.begin(), g.end());
  }
  return out;
}

double ActorCritic::loss_and_gradient(const TrajectoryBatch& batch, std::span<const double> advantages,
                                      std::span<const double> rets, std::vector<double>* grad,
                                      UpdateStats* stats) const {
  std::size_t total = 0;
  for (const auto* traj : batch) total += traj->size();
  if (advantages.size() != total || rets.size() != total)
    throw std::invalid_argument("actor-critic: advantage/return length mismatch");
  if (grad) grad->assign(params_.size(), 0.0);
  if (total == 0) return 0.0;
  const double inv_n = 1.0 / static_cast<double>(total);
  double loss = 0.0, pl = 0.0, vl = 0.0, ent = 0.0;
  std::vector<double> dz(num_actions_), dh(hidden_);
  std::size_t idx = 0;
  for (const auto* traj : batch) {
    for (std::size_t k = 0; k < traj->size(); ++k, ++idx) {
      const auto obs = traj->observation(k);
      const auto f = forward(obs);
      const int a = traj->actions[k];
      const double adv = advantages[idx];
      double h = 0.0;
      for (double p : f.probs)
        if (p > 0.0) h -= p * std::log(p);
      const double logp = std::log(std::max(f.probs[a], 1e-300));
      const double verr = f.value - rets[idx];
      pl += -adv * logp;
      ent += h;
      vl += 0.5 * verr * verr;
      loss += -adv * logp - spec_.entropy_coef * h + spec_.value_coef * 0.5 * verr * verr;
      if (!grad) continue;
      auto& g = *grad;
      for (int c = 0; c < num_actions_; ++c) {
        const double p = f.probs[c];
        const double logpc = std::log(std::max(p, 1e-300));
        dz[c] = (-adv * ((c == a ? 1.0 : 0.0) - p) + spec_.entropy_coef * p * (logpc + h)) * inv_n;
      }
      const double dv = spec_.value_coef * verr * inv_n;
      std::fill(dh.begin(), dh.end(), 0.0);
      for (int c = 0; c < num_actions_; ++c) {
        double* grow = g.data() + wp_ + static_cast<std::size_t>(c) * hidden_;
        const double* prow = params_.data() + wp_ + static_cast<std::size_t>(c) * hidden_;
        for (int j = 0; j < hidden_; ++j) {
          grow[j] += dz[c] * f.hidden[j];
          dh[j] += dz[c] * prow[j];
        }
        g[bp_ + c] += dz[c];
      }
      for (int j = 0; j < hidden_; ++j) {
        g[wv_ + j] += dv * f.hidden[j];
        dh[j] += dv * params_[wv_ + j];
      }
      g[bv_] += dv;
      for (int j = 0; j < hidden_; ++j) {
        const double du = dh[j] * (1.0 - f.hidden[j] * f.hidden[j]);
        if (du == 0.0) continue;
        double* grow = g.data() + w1_ + static_cast<std::size_t>(j) * obs_dim_;
        for (int c = 0; c < obs_dim_; ++c)
          if (obs[c] != 0.0f) grow[c] += du * obs[c];
        g[b1_ + j] += du;
      }
    }
  }
  if (stats) {
    stats->policy_loss = pl * inv_n;
    stats->value_loss = vl * inv_n;
    stats->entropy = ent * inv_n;
    stats->samples = static_cast<std::int64_t>(total);
  }
  return loss * inv_n;
}

double ActorCritic::surrogate(const TrajectoryBatch& batch, std::span<const double> advantages,
                              std::span<const double> rets) const {
  return loss_and_gradient(batch, advantages, rets, nullptr, nullptr);
}

std::vector<double> ActorCritic::surrogate_gradient(const TrajectoryBatch& batch,
                                                    std::span<const double> advantages,
                                                    std::span<const double> rets) const {
  std::vector<double> g;
  loss_and_gradient(batch, advantages, rets, &g, nullptr);
  return g;
}

UpdateStats ActorCritic::update(const TrajectoryBatch& batch) {
  UpdateStats stats;
  const auto rets = returns(batch);
  if (rets.empty()) return stats;
  std::vector<double> adv(rets.size());
  std::size_t idx = 0;
  for (const auto* traj : batch)
    for (std::size_t k = 0; k < traj->size(); ++k, ++idx) adv[idx] = rets[idx] - value(traj->observation(k));
  // Normalized advantages.
  double mean = 0.0;
  for (double x : adv) mean += x;
  mean /= static_cast<double>(adv.size());
  double var = 0.0;
  for (double x : adv) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(adv.size()));
  for (double& x : adv) x = sd > 1e-8 ? (x - mean) / sd : x - mean;

  std::vector<double> grad;
  const double loss = loss_and_gradient(batch, adv, rets, &grad, &stats);
  double norm2 = 0.0;
  for (double g : grad) norm2 += g * g;
  if (!std::isfinite(loss) || !std::isfinite(norm2))
    throw TrainingDiverged("actor-critic: non-finite loss (" + std::to_string(loss) + ") after " +
                           std::to_string(adam_step_) + " updates");
  const double norm = std::sqrt(norm2);
  const double scale = norm > spec_.max_grad_norm ? spec_.max_grad_norm / norm : 1.0;

  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  ++adam_step_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(adam_step_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(adam_step_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const double g = grad[i] * scale;
    adam_m_[i] = kBeta1 * adam_m_[i] + (1.0 - kBeta1) * g;
    adam_v_[i] = kBeta2 * adam_v_[i] + (1.0 - kBeta2) * g * g;
    params_[i] -= spec_.learning_rate * (adam_m_[i] / c1) / (std::sqrt(adam_v_[i] / c2) + kEps);
  }
  return stats;
}

void ActorCritic::save(std::ostream& out) const {
  out << "dims " << obs_dim_ << ' ' << hidden_ << ' ' << num_actions_ << " adam_step " << adam_step_
      << '\n';
  const auto old = out.precision(17);
  write_doubles(out, params_);
  write_doubles(out, adam_m_);
  write_doubles(out, adam_v_);
  out.precision(old);
}

void ActorCritic::load(std::istream& in) {
  expect_token(in, "dims");
  const int d = read_value<int>(in, "obs_dim");
  const int h = read_value<int>(in, "hidden");
  const int a = read_value<int>(in, "actions");
  if (d != obs_dim_ || h != hidden_ || a != num_actions_)
    throw std::runtime_error("checkpoint: actor-critic dimensions mismatch");
  expect_token(in, "adam_step");
  adam_step_ = read_value<std::int64_t>(in, "adam_step");
  params_ = read_doubles(in, params_.size(), "params");
  adam_m_ = read_doubles(in, params_.size(), "adam_m");
  adam_v_ = read_doubles(in, params_.size(), "adam_v");
}

}  // namespace srim
