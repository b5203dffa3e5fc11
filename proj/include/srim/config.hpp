#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "srim/dilemmas.hpp"
#include "srim/learn.hpp"
#include "srim/shaping.hpp"
#include "srim/topology.hpp"

namespace srim {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TopologySource {
  std::string named;               // e.g. "star"
  std::filesystem::path file;      // edge-list file, used when `named` is empty
  Topology load() const;
  bool operator==(const TopologySource&) const = default;
};

struct PreferenceSource {
  std::string preset;  // NN, CN, HBN, baseline; empty means explicit weights
  std::vector<PreferenceWeights> agents;  // one entry (homogeneous) or one per agent
  PreferenceProfile resolve(int n) const;
  std::string label() const;
  bool operator==(const PreferenceSource&) const = default;
};

struct RunConfig {
  std::string name = "run";
  EnvConfig env;
  std::string map = "harvest-small";  // built-in map name or file path
  TopologySource topology;
  PreferenceSource preference;
  PolicySpec learner;
  std::vector<std::uint64_t> seeds{1};
  int workers = 4;
  std::int64_t total_steps = 0;  // 0: 100 episodes
  std::int64_t exploration_end = -1;  // -1: proportional default
  std::int64_t transient_end = -1;
  std::filesystem::path output_dir = "runs";
  int checkpoint_every = 50;
  int plot_stride = 0;  // 0: max(1, episodes / 500)
  bool shaping = true;
  bool seed_parallel = false;
  std::optional<PbtConfig> pbt;

  // Fills derived defaults and checks invariants; throws ConfigError.
  void validate() const;
  std::int64_t effective_total_steps() const;
  StageWindows stage_windows() const;
  GridMap load_map() const;

  nlohmann::json to_json() const;
  // Strict: unknown keys are rejected. Relative file paths resolve against `base_dir`.
  static RunConfig from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
  static RunConfig load(const std::filesystem::path& path);

  // Hash of everything that influences results (excludes output_dir).
  std::string hash() const;
  std::string env_hash() const;
  std::string topology_hash() const;
};

std::string hex64(std::uint64_t x);

}  // namespace srim
