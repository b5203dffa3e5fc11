#include "srim/shaping.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace srim {

namespace {

void check_weights(const PreferenceWeights& w) {
  for (double x : {w.alpha, w.beta, w.omega})
    if (!(x >= 0.0) || !std::isfinite(x))
      throw std::invalid_argument("preference weights must be finite and non-negative");
}

}  // namespace

PreferenceProfile::PreferenceProfile(std::vector<PreferenceWeights> weights, std::string tag)
    : weights_(std::move(weights)), tag_(std::move(tag)) {
  for (const auto& w : weights_) check_weights(w);
}

PreferenceProfile PreferenceProfile::baseline(int n) {
  return PreferenceProfile(std::vector<PreferenceWeights>(n), "baseline");
}

PreferenceProfile PreferenceProfile::homogeneous(int n, PreferenceWeights w, std::string tag) {
  return PreferenceProfile(std::vector<PreferenceWeights>(n, w), std::move(tag));
}

PreferenceProfile PreferenceProfile::preset(std::string_view name, int n) {
  if (name == "NN") return homogeneous(n, {1.0, 0.0, 0.0}, "NN");
  if (name == "CN") return homogeneous(n, {0.0, 1.0, 0.0}, "CN");
  if (name == "HBN") return homogeneous(n, {0.0, 0.0, 1.0}, "HBN");
  if (name == "baseline") return baseline(n);
  throw std::invalid_argument("unknown preference preset '" + std::string(name) + "'");
}

bool PreferenceProfile::is_baseline() const {
  return std::all_of(weights_.begin(), weights_.end(),
                     [](const PreferenceWeights& w) { return w == PreferenceWeights{}; });
}

bool PreferenceProfile::is_one_hot() const {
  return std::all_of(weights_.begin(), weights_.end(), [](const PreferenceWeights& w) {
    return (w.alpha > 0) + (w.beta > 0) + (w.omega > 0) == 1;
  });
}

PreferenceProfile set_weights(const PreferenceProfile& profile, int agent, PreferenceWeights w) {
  check_weights(w);
  if (agent < 0 || agent >= profile.size())
    throw std::invalid_argument("agent " + std::to_string(agent) + " not in profile");
  auto weights = profile.weights();
  if (weights[agent] == w) return profile;
  weights[agent] = w;
  return PreferenceProfile(std::move(weights), "mixed");
}

IdMapping IdMapping::identity(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return IdMapping(std::move(v));
}

IdMapping::IdMapping(std::vector<int> agent_to_vertex) : to_vertex_(std::move(agent_to_vertex)) {
  const int n = size();
  to_agent_.assign(n, -1);
  for (int a = 0; a < n; ++a) {
    const int v = to_vertex_[a];
    if (v < 0 || v >= n || to_agent_[v] != -1)
      throw std::invalid_argument("id mapping is not a bijection over 0.." + std::to_string(n - 1));
    to_agent_[v] = a;
  }
}

std::vector<Portfolio> resolve_portfolio(const Topology& t, const StructuralProfile& profile,
                                         const PreferenceProfile& prefs, const IdMapping& mapping) {
  const int n = t.size();
  if (prefs.size() != n)
    throw std::invalid_argument("preference profile has " + std::to_string(prefs.size()) +
                                " agents, topology has " + std::to_string(n));
  if (mapping.size() != n) throw std::invalid_argument("id mapping size does not match topology");
  const auto sets = portfolios(t, profile);
  std::vector<Portfolio> out(n);
  for (int agent = 0; agent < n; ++agent) {
    const int v = mapping.vertex_of(agent);
    const auto& w = prefs.at(agent);
    std::map<int, double> acc;
    auto add = [&](const VertexSet& set, double weight) {
      if (weight == 0.0) return;
      for (int u : set) acc[mapping.agent_of(u)] += weight;
    };
    add(sets.nearest[v], w.alpha);
    add(sets.clique[v], w.beta);
    add(sets.hbn[v], w.omega);
    out[agent].assign(acc.begin(), acc.end());
  }
  return out;
}

ShapedStep shape(std::span<const double> env_rewards, const std::vector<Portfolio>& portfolios) {
  const std::size_t n = env_rewards.size();
  if (portfolios.size() != n) throw std::invalid_argument("portfolio count does not match rewards");
  ShapedStep s;
  s.env.assign(env_rewards.begin(), env_rewards.end());
  s.socio.assign(n, 0.0);
  s.total.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double socio = 0.0;
    for (auto [j, w] : portfolios[i]) socio += w * env_rewards[j];
    s.socio[i] = socio;
    s.total[i] = env_rewards[i] + socio;
  }
  return s;
}

}  // namespace srim
