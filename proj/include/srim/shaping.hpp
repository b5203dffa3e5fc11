#pragma once

#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "srim/topology.hpp"

namespace srim {

// Care weights over the nearest (alpha), clique (beta) and
// critical-connection (omega) neighbor sets.
struct PreferenceWeights {
  double alpha = 0.0;
  double beta = 0.0;
  double omega = 0.0;
  bool operator==(const PreferenceWeights&) const = default;
};

class PreferenceProfile {
 public:
  PreferenceProfile() = default;
  // Throws std::invalid_argument on negative or non-finite weights.
  explicit PreferenceProfile(std::vector<PreferenceWeights> weights, std::string tag = "mixed");

  static PreferenceProfile baseline(int n);
  static PreferenceProfile homogeneous(int n, PreferenceWeights w, std::string tag = "mixed");
  // NN (alpha=1), CN (beta=1), HBN (omega=1) or baseline.
  static PreferenceProfile preset(std::string_view name, int n);

  int size() const { return static_cast<int>(weights_.size()); }
  const PreferenceWeights& at(int agent) const { return weights_.at(agent); }
  const std::vector<PreferenceWeights>& weights() const { return weights_; }
  const std::string& tag() const { return tag_; }
  bool is_baseline() const;
  // True when every agent has exactly one positive weight.
  bool is_one_hot() const;

  bool operator==(const PreferenceProfile&) const = default;

 private:
  std::vector<PreferenceWeights> weights_;
  std::string tag_ = "baseline";
};

inline constexpr std::string_view kBaselineProtocol = "network-free and preference-free protocol";

/// Returns a copy with one agent's weights replaced.
PreferenceProfile set_weights(const PreferenceProfile& profile, int agent, PreferenceWeights w);

// Bijection between agent ids and topology vertex ids.
class IdMapping {
 public:
  static IdMapping identity(int n);
  // agent_to_vertex[a] = vertex of agent a. Throws unless a permutation.
  explicit IdMapping(std::vector<int> agent_to_vertex);

  int size() const { return static_cast<int>(to_vertex_.size()); }
  int vertex_of(int agent) const { return to_vertex_.at(agent); }
  int agent_of(int vertex) const { return to_agent_.at(vertex); }

 private:
  std::vector<int> to_vertex_;
  std::vector<int> to_agent_;
};

// (agent id, accumulated weight), sorted by agent id.
using Portfolio = std::vector<std::pair<int, double>>;

std::vector<Portfolio> resolve_portfolio(const Topology& t, const StructuralProfile& profile,
                                         const PreferenceProfile& prefs, const IdMapping& mapping);

struct ShapedStep {
  std::vector<double> env;
  std::vector<double> socio;
  std::vector<double> total;
};

/// r_socio^i = sum over portfolio(i) of w * r_env^j; r_tot = r_env + r_socio.
ShapedStep shape(std::span<const double> env_rewards, const std::vector<Portfolio>& portfolios);

}  // namespace srim
