#include "srim/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace srim {

using nlohmann::json;

namespace {

void check_keys(const json& j, std::string_view section, std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) throw ConfigError(std::string(section) + ": expected an object");
  for (const auto& [k, v] : j.items())
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ConfigError(std::string(section) + ": unknown key '" + k + "'");
}

template <typename T>
void read(const json& j, std::string_view key, T& out, std::string_view section) {
  auto it = j.find(std::string(key));
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string(section) + "." + std::string(key) + ": " + e.what());
  }
}

json weights_json(const PreferenceWeights& w) {
  return {{"alpha", w.alpha}, {"beta", w.beta}, {"omega", w.omega}};
}

PreferenceWeights weights_from(const json& j, std::string_view section) {
  check_keys(j, section, {"alpha", "beta", "omega"});
  PreferenceWeights w;
  read(j, "alpha", w.alpha, section);
  read(j, "beta", w.beta, section);
  read(j, "omega", w.omega, section);
  return w;
}

std::filesystem::path resolve(const std::filesystem::path& p, const std::filesystem::path& base) {
  if (p.empty() || p.is_absolute() || base.empty()) return p;
  return (base / p).lexically_normal();
}

}  // namespace

std::string hex64(std::uint64_t x) {
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << x;
  return out.str();
}

Topology TopologySource::load() const {
  if (!named.empty()) return build_named(named);
  if (file.empty()) throw ConfigError("topology: set either 'named' or 'file'");
  return load_edge_list_file(file);
}

PreferenceProfile PreferenceSource::resolve(int n) const {
  if (!preset.empty()) return PreferenceProfile::preset(preset, n);
  if (agents.size() == 1) return PreferenceProfile::homogeneous(n, agents.front(), "mixed");
  if (static_cast<int>(agents.size()) != n)
    throw ConfigError("preference: " + std::to_string(agents.size()) + " weight entries for " +
                      std::to_string(n) + " agents");
  return PreferenceProfile(agents, "mixed");
}

std::string PreferenceSource::label() const { return preset.empty() ? "mixed" : preset; }

std::int64_t RunConfig::effective_total_steps() const {
  return total_steps > 0 ? total_steps : 100LL * env.episode_len;
}

StageWindows RunConfig::stage_windows() const {
  const auto total = effective_total_steps();
  const auto defaults = default_stages(total);
  const auto explore = exploration_end >= 0 ? exploration_end : defaults.stage1.begin;
  const auto transient = transient_end >= 0 ? transient_end : defaults.stage2.end;
  try {
    return segment_stages(total, explore, transient);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("stages: ") + e.what());
  }
}

GridMap RunConfig::load_map() const {
  const auto names = builtin_map_names();
  if (std::find(names.begin(), names.end(), map) != names.end())
    return GridMap::parse(builtin_map_text(map));
  return GridMap::load(map);
}

void RunConfig::validate() const {
  if (name.empty() || name.find('/') != std::string::npos)
    throw ConfigError("name must be non-empty and contain no '/'");
  try {
    env.validate();
    learner.validate();
    if (pbt) pbt->validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (seeds.empty()) throw ConfigError("seeds must be non-empty");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  if (uniq.size() != seeds.size()) throw ConfigError("seeds must be distinct");
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (total_steps < 0) throw ConfigError("total_steps must be >= 0");
  if (effective_total_steps() < env.episode_len) throw ConfigError("total_steps must cover one episode");
  if (checkpoint_every < 0) throw ConfigError("checkpoint_every must be >= 0");
  if (plot_stride < 0) throw ConfigError("plot_stride must be >= 0");
  const auto names = builtin_map_names();
  if (std::find(names.begin(), names.end(), map) == names.end() && !std::filesystem::exists(map))
    throw ConfigError("map '" + map + "' is neither a built-in map nor an existing file");
  if (topology.named.empty() && !std::filesystem::exists(topology.file))
    throw ConfigError("topology file '" + topology.file.string() + "' does not exist");
  const auto windows = stage_windows();
  for (int k = 0; k < 3; ++k) {
    const auto& w = windows[k];
    if (w.end / env.episode_len <= w.begin / env.episode_len)
      throw ConfigError("stage " + std::to_string(k + 1) + " window [" + std::to_string(w.begin) + ", " +
                        std::to_string(w.end) + ") contains no episode end; raise total_steps");
  }
  try {
    const auto topo = topology.load();
    (void)preference.resolve(topo.size());
    Scenario probe(env, load_map(), topo);
    (void)probe;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
}

json RunConfig::to_json() const {
  json e = {
      {"kind", std::string(to_string(env.kind))},
      {"map", map},
      {"episode_len", env.episode_len},
      {"apple_reward", env.apple_reward},
      {"fire_cost", env.fire_cost},
      {"hit_penalty", env.hit_penalty},
      {"hit_freeze", env.hit_freeze},
      {"fire_length", env.fire_length},
      {"fire_width", env.fire_width},
      {"clean_length", env.clean_length},
      {"clean_width", env.clean_width},
      {"view_size", env.view_size},
      {"regrowth", env.regrowth},
      {"regrowth_radius", env.regrowth_radius},
      {"initial_apple_fraction", env.initial_apple_fraction},
      {"apple_spawn_rate", env.apple_spawn_rate},
      {"saturation_threshold", env.saturation_threshold},
      {"waste_spawn_prob", env.waste_spawn_prob},
      {"waste_cap", env.waste_cap},
      {"initial_waste", env.initial_waste},
  };
  json topo = topology.named.empty() ? json{{"file", topology.file.generic_string()}}
                                     : json{{"named", topology.named}};
  json pref;
  if (!preference.preset.empty()) {
    pref = {{"preset", preference.preset}};
  } else {
    json agents = json::array();
    for (const auto& w : preference.agents) agents.push_back(weights_json(w));
    pref = {{"agents", agents}};
  }
  json learn = {
      {"kind", std::string(to_string(learner.kind))},
      {"hidden_size", learner.hidden_size},
      {"learning_rate", learner.learning_rate},
      {"entropy_coef", learner.entropy_coef},
      {"gamma", learner.gamma},
      {"value_coef", learner.value_coef},
      {"max_grad_norm", learner.max_grad_norm},
      {"epsilon_start", learner.epsilon_start},
      {"epsilon_end", learner.epsilon_end},
      {"epsilon_decay_episodes", learner.epsilon_decay_episodes},
  };
  const auto windows = stage_windows();
  json j = {
      {"name", name},
      {"env", e},
      {"topology", topo},
      {"preference", pref},
      {"learner", learn},
      {"seeds", seeds},
      {"workers", workers},
      {"total_steps", effective_total_steps()},
      {"stages", {{"exploration_end", windows.stage1.begin}, {"transient_end", windows.stage2.end}}},
      {"output_dir", output_dir.generic_string()},
      {"checkpoint_every", checkpoint_every},
      {"plot_stride", plot_stride},
      {"shaping", shaping},
      {"seed_parallel", seed_parallel},
  };
  if (pbt)
    j["pbt"] = {{"population", pbt->population},
                {"perturb", pbt->perturb},
                {"exploit_interval", pbt->exploit_interval},
                {"quantile", pbt->quantile}};
  else
    j["pbt"] = nullptr;
  return j;
}

RunConfig RunConfig::from_json(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  check_keys(j, "config",
             {"name", "env", "topology", "preference", "learner", "seeds", "workers", "total_steps",
              "stages", "output_dir", "checkpoint_every", "plot_stride", "shaping", "seed_parallel",
              "pbt"});
  read(j, "name", c.name, "config");
  if (j.contains("env")) {
    const auto& e = j["env"];
    check_keys(e, "env",
               {"kind", "map", "episode_len", "apple_reward", "fire_cost", "hit_penalty", "hit_freeze",
                "fire_length", "fire_width", "clean_length", "clean_width", "view_size", "regrowth",
                "regrowth_radius", "initial_apple_fraction", "apple_spawn_rate",
                "saturation_threshold", "waste_spawn_prob", "waste_cap", "initial_waste"});
    std::string kind = "harvest";
    read(e, "kind", kind, "env");
    try {
      c.env.kind = parse_game_kind(kind);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
    if (c.env.kind == GameKind::Cleanup) {
      c.map = "cleanup-small";
      c.env.initial_apple_fraction = 0.0;
    }
    read(e, "map", c.map, "env");
    const auto names = builtin_map_names();
    if (std::find(names.begin(), names.end(), c.map) == names.end())
      c.map = resolve(c.map, base_dir).generic_string();
    read(e, "episode_len", c.env.episode_len, "env");
    read(e, "apple_reward", c.env.apple_reward, "env");
    read(e, "fire_cost", c.env.fire_cost, "env");
    read(e, "hit_penalty", c.env.hit_penalty, "env");
    read(e, "hit_freeze", c.env.hit_freeze, "env");
    read(e, "fire_length", c.env.fire_length, "env");
    read(e, "fire_width", c.env.fire_width, "env");
    read(e, "clean_length", c.env.clean_length, "env");
    read(e, "clean_width", c.env.clean_width, "env");
    read(e, "view_size", c.env.view_size, "env");
    read(e, "regrowth", c.env.regrowth, "env");
    read(e, "regrowth_radius", c.env.regrowth_radius, "env");
    read(e, "initial_apple_fraction", c.env.initial_apple_fraction, "env");
    read(e, "apple_spawn_rate", c.env.apple_spawn_rate, "env");
    read(e, "saturation_threshold", c.env.saturation_threshold, "env");
    read(e, "waste_spawn_prob", c.env.waste_spawn_prob, "env");
    read(e, "waste_cap", c.env.waste_cap, "env");
    read(e, "initial_waste", c.env.initial_waste, "env");
  }
  if (j.contains("topology")) {
    const auto& t = j["topology"];
    check_keys(t, "topology", {"named", "file"});
    read(t, "named", c.topology.named, "topology");
    std::string file;
    read(t, "file", file, "topology");
    if (!c.topology.named.empty() && !file.empty())
      throw ConfigError("topology: set only one of 'named' and 'file'");
    c.topology.file = resolve(file, base_dir);
  } else {
    c.topology.named = "star";
  }
  if (c.topology.named.empty() && c.topology.file.empty()) throw ConfigError("topology: set 'named' or 'file'");
  if (j.contains("preference")) {
    const auto& p = j["preference"];
    check_keys(p, "preference", {"preset", "alpha", "beta", "omega", "agents"});
    read(p, "preset", c.preference.preset, "preference");
    const bool has_homog = p.contains("alpha") || p.contains("beta") || p.contains("omega");
    if (!c.preference.preset.empty() && (has_homog || p.contains("agents")))
      throw ConfigError("preference: a preset excludes explicit weights");
    if (has_homog && p.contains("agents")) throw ConfigError("preference: use either alpha/beta/omega or agents");
    if (has_homog) {
      json w = json::object();
      for (const char* k : {"alpha", "beta", "omega"})
        if (p.contains(k)) w[k] = p[k];
      c.preference.agents = {weights_from(w, "preference")};
    } else if (p.contains("agents")) {
      if (!p["agents"].is_array() || p["agents"].empty())
        throw ConfigError("preference.agents must be a non-empty array");
      for (const auto& w : p["agents"]) c.preference.agents.push_back(weights_from(w, "preference.agents"));
    } else if (c.preference.preset.empty()) {
      c.preference.preset = "baseline";
    }
    for (const auto& w : c.preference.agents)
      if (w.alpha < 0 || w.beta < 0 || w.omega < 0) throw ConfigError("preference weights must be >= 0");
  } else {
    c.preference.preset = "baseline";
  }
  if (!c.preference.preset.empty()) {
    const std::set<std::string> presets{"NN", "CN", "HBN", "baseline"};
    if (!presets.count(c.preference.preset))
      throw ConfigError("preference: unknown preset '" + c.preference.preset + "'");
  }
  if (j.contains("learner")) {
    const auto& l = j["learner"];
    check_keys(l, "learner",
               {"kind", "hidden_size", "learning_rate", "entropy_coef", "gamma", "value_coef",
                "max_grad_norm", "epsilon_start", "epsilon_end", "epsilon_decay_episodes"});
    std::string kind = "actor-critic";
    read(l, "kind", kind, "learner");
    try {
      c.learner.kind = parse_policy_kind(kind);
    } catch (const std::invalid_argument& ex) {
      throw ConfigError(ex.what());
    }
    read(l, "hidden_size", c.learner.hidden_size, "learner");
    read(l, "learning_rate", c.learner.learning_rate, "learner");
    read(l, "entropy_coef", c.learner.entropy_coef, "learner");
    read(l, "gamma", c.learner.gamma, "learner");
    read(l, "value_coef", c.learner.value_coef, "learner");
    read(l, "max_grad_norm", c.learner.max_grad_norm, "learner");
    read(l, "epsilon_start", c.learner.epsilon_start, "learner");
    read(l, "epsilon_end", c.learner.epsilon_end, "learner");
    read(l, "epsilon_decay_episodes", c.learner.epsilon_decay_episodes, "learner");
  }
  read(j, "seeds", c.seeds, "config");
  read(j, "workers", c.workers, "config");
  read(j, "total_steps", c.total_steps, "config");
  if (j.contains("stages")) {
    const auto& s = j["stages"];
    check_keys(s, "stages", {"exploration_end", "transient_end"});
    read(s, "exploration_end", c.exploration_end, "stages");
    read(s, "transient_end", c.transient_end, "stages");
  }
  std::string out_dir = c.output_dir.generic_string();
  read(j, "output_dir", out_dir, "config");
  c.output_dir = out_dir;
  read(j, "checkpoint_every", c.checkpoint_every, "config");
  read(j, "plot_stride", c.plot_stride, "config");
  read(j, "shaping", c.shaping, "config");
  read(j, "seed_parallel", c.seed_parallel, "config");
  if (j.contains("pbt") && !j["pbt"].is_null()) {
    const auto& p = j["pbt"];
    check_keys(p, "pbt", {"population", "perturb", "exploit_interval", "quantile"});
    PbtConfig pc;
    read(p, "population", pc.population, "pbt");
    read(p, "perturb", pc.perturb, "pbt");
    read(p, "exploit_interval", pc.exploit_interval, "pbt");
    read(p, "quantile", pc.quantile, "pbt");
    c.pbt = pc;
  }
  return c;
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "': " + e.what());
  }
  auto c = from_json(j, path.parent_path());
  c.validate();
  return c;
}

std::string RunConfig::hash() const {
  auto j = to_json();
  j.erase("output_dir");
  j.erase("seed_parallel");
  // Map and topology files enter by content, not by path.
  j["env"]["map"] = load_map().to_text();
  j["topology"] = topology.load().to_edge_list();
  return hex64(fnv1a(j.dump()));
}

std::string RunConfig::env_hash() const {
  auto e = to_json()["env"];
  e["map"] = load_map().to_text();
  return hex64(fnv1a(e.dump()));
}

std::string RunConfig::topology_hash() const { return hex64(fnv1a(topology.load().to_edge_list())); }

}  // namespace srim
