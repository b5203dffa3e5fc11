#include "srim/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "srim/analysis.hpp"
#include "srim/commands.hpp"
#include "srim/learn.hpp"

namespace srim {

using nlohmann::json;
namespace fs = std::filesystem;

fs::path output_root(const fs::path& p) {
  const char* root = std::getenv(kOutputRootEnv);
  if (p.is_absolute() || root == nullptr || *root == '\0') return p;
  return fs::path(root) / p;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_episodes_csv(std::ostream& out, std::span<const EpisodeLog> logs, std::string_view config_hash,
                        std::uint64_t seed) {
  out << "# config_hash=" << config_hash << " seed=" << seed << '\n' << kEpisodeColumns << '\n';
  for (const auto& log : logs)
    for (std::size_t i = 0; i < log.agents.size(); ++i) {
      const auto& a = log.agents[i];
      out << log.seed << ',' << log.episode << ',' << i << ',' << a.apples << ',' << format_double(a.env_reward)
          << ',' << format_double(a.socio_reward) << ',' << a.fire_count << ',' << a.clean_count << '\n';
    }
}

namespace {

template <typename T>
T parse_field(std::string_view s, int line) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("episodes csv line " + std::to_string(line) + ": bad field '" + std::string(s) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

EpisodeCsv read_episodes_csv(std::istream& in) {
  EpisodeCsv csv;
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0)
    throw std::runtime_error("episodes csv: missing '# config_hash=' header");
  std::istringstream hdr(line.substr(2));
  std::string tok;
  bool have_hash = false;
  while (hdr >> tok) {
    if (tok.rfind("config_hash=", 0) == 0) {
      csv.config_hash = tok.substr(12);
      have_hash = true;
    } else if (tok.rfind("seed=", 0) == 0) {
      csv.seed = parse_field<std::uint64_t>(std::string_view(tok).substr(5), 1);
    }
  }
  if (!have_hash) throw std::runtime_error("episodes csv: header lacks config_hash");
  if (!std::getline(in, line) || line != kEpisodeColumns)
    throw std::runtime_error("episodes csv: unexpected column header");
  int lineno = 2;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw std::runtime_error("episodes csv line " + std::to_string(lineno) + ": expected 8 fields");
    const auto seed = parse_field<std::uint64_t>(f[0], lineno);
    const auto episode = parse_field<std::int64_t>(f[1], lineno);
    const auto agent = parse_field<std::size_t>(f[2], lineno);
    if (csv.logs.empty() || csv.logs.back().episode != episode) {
      if (!csv.logs.empty() && episode < csv.logs.back().episode)
        throw std::runtime_error("episodes csv line " + std::to_string(lineno) + ": episodes out of order");
      EpisodeLog log;
      log.seed = seed;
      log.episode = episode;
      csv.logs.push_back(std::move(log));
    }
    auto& agents = csv.logs.back().agents;
    if (agent != agents.size())
      throw std::runtime_error("episodes csv line " + std::to_string(lineno) + ": agent ids out of order");
    AgentEpisodeStats a;
    a.apples = parse_field<std::int64_t>(f[3], lineno);
    a.env_reward = parse_field<double>(f[4], lineno);
    a.socio_reward = parse_field<double>(f[5], lineno);
    a.fire_count = parse_field<std::int64_t>(f[6], lineno);
    a.clean_count = parse_field<std::int64_t>(f[7], lineno);
    agents.push_back(a);
  }
  return csv;
}

EpisodeCsv read_episodes_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  try {
    return read_episodes_csv(in);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

namespace {

struct SeedResult {
  std::uint64_t seed = 0;
  bool ok = true;
  std::string error;
  std::vector<EpisodeLog> logs;
  std::vector<UpdateRecord> updates;
  json pbt;  // null unless PBT ran
};

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

json profile_json(const PreferenceProfile& p) {
  json a = json::array();
  for (int i = 0; i < p.size(); ++i) {
    const auto w = p.at(i);
    a.push_back({w.alpha, w.beta, w.omega});
  }
  return a;
}

SeedResult train_seed(const RunConfig& config, const Scenario& scenario, const PreferenceProfile& profile,
                      std::uint64_t seed, const fs::path& seed_dir, std::string_view hash) {
  SeedResult r;
  r.seed = seed;
  TrainOptions opts;
  opts.spec = config.learner;
  opts.workers = config.workers;
  opts.seed = seed;
  opts.total_steps = config.effective_total_steps();
  opts.shaping_enabled = config.shaping;
  opts.checkpoint_every = config.checkpoint_every;
  opts.checkpoint_dir = seed_dir / "checkpoints";
  opts.config_hash = std::string(hash);
  if (config.pbt) {
    auto run = run_pbt(scenario, profile, opts, *config.pbt);
    // The reported member is the one with the best final-interval objective.
    std::size_t best = 0;
    double best_obj = -1e300;
    for (std::size_t k = 0; k < run.members.size(); ++k) {
      const auto& logs = run.members[k].logs;
      const auto w = std::min<std::size_t>(logs.size(), static_cast<std::size_t>(config.pbt->exploit_interval));
      double s = 0.0;
      for (std::size_t e = logs.size() - w; e < logs.size(); ++e) s += utilitarian(logs[e]);
      const double obj = w ? s / static_cast<double>(w) : 0.0;
      if (obj > best_obj) {
        best_obj = obj;
        best = k;
      }
    }
    r.logs = run.members[best].logs;
    r.updates = run.members[best].updates;
    json rounds = json::array();
    for (const auto& round : run.profiles) {
      json members = json::array();
      for (const auto& p : round) members.push_back(profile_json(p));
      rounds.push_back(members);
    }
    r.pbt = {{"reported_member", best}, {"objective", best_obj}, {"profiles", rounds}};
    return r;
  }
  Trainer trainer(scenario, profile, opts);
  try {
    trainer.run();
  } catch (const RolloutError& e) {
    r.ok = false;
    r.error = e.what();
    r.logs = trainer.logs();
    r.logs.insert(r.logs.end(), e.partial.begin(), e.partial.end());
    std::sort(r.logs.begin(), r.logs.end(), [](const auto& a, const auto& b) { return a.episode < b.episode; });
    r.updates = trainer.updates();
    return r;
  } catch (const std::exception& e) {
    r.ok = false;
    r.error = e.what();
    r.logs = trainer.logs();
    r.updates = trainer.updates();
    return r;
  }
  r.logs = trainer.logs();
  r.updates = trainer.updates();
  return r;
}

std::string stage_rows_csv(std::string_view label, std::span<const EpisodeLog> logs, const StageWindows& windows) {
  std::ostringstream out;
  for (Quantity q : {Quantity::Apples, Quantity::EnvReward, Quantity::SocioReward, Quantity::FireCount,
                     Quantity::CleanCount}) {
    for (const auto& c : stage_aggregate(logs, windows, q))
      out << label << ',' << to_string(q) << ',' << (c.stage + 1) << ',' << c.agent << ',' << c.episodes << ','
          << format_double(c.mean_summed) << ',' << format_double(c.median) << ',' << format_double(c.q1) << ','
          << format_double(c.q3) << '\n';
  }
  return out.str();
}

json distribution_json(const Distribution& d) {
  return {{"count", d.count}, {"dropped", d.dropped}, {"median", d.median},
          {"q1", d.q1},       {"q3", d.q3},           {"mean", d.mean}};
}

}  // namespace

RunOutcome cmd_run(const RunConfig& config, std::ostream& progress) {
  config.validate();
  const auto topo = config.topology.load();
  const Scenario scenario(config.env, config.load_map(), topo);
  const auto profile = config.preference.resolve(topo.size());
  const auto hash = config.hash();
  const auto windows = config.stage_windows();
  const auto& structure = scenario.structure;
  const auto range = tctr(structure);
  const int n = topo.size();

  RunOutcome outcome;
  outcome.dir = output_root(config.output_dir) / config.name;
  fs::create_directories(outcome.dir);
  write_file(outcome.dir / "config.json", config.to_json().dump(2) + "\n");

  std::vector<SeedResult> results(config.seeds.size());
  std::mutex progress_mu;
  auto run_one = [&](std::size_t k) {
    const auto seed = config.seeds[k];
    const auto seed_dir = outcome.dir / ("seed_" + std::to_string(seed));
    {
      std::lock_guard lock(progress_mu);
      progress << "[" << config.name << "] seed " << seed << ": training "
               << config.effective_total_steps() / config.env.episode_len << " episodes\n";
    }
    try {
      fs::create_directories(seed_dir);
      results[k] = train_seed(config, scenario, profile, seed, seed_dir, hash);
    } catch (const std::exception& e) {
      results[k].seed = seed;
      results[k].ok = false;
      results[k].error = e.what();
    }
    auto& r = results[k];
    for (auto& log : r.logs) log.step_end = (log.episode + 1) * config.env.episode_len;
    std::ostringstream eps;
    write_episodes_csv(eps, r.logs, hash, seed);
    write_file(seed_dir / "episodes.csv", eps.str());

    std::ostringstream curve;
    curve << "# config_hash=" << hash << " seed=" << seed << "\nepisode_end,agent_id,policy_loss,value_loss,entropy,samples\n";
    for (const auto& u : r.updates)
      curve << u.episode_end << ',' << u.agent << ',' << format_double(u.stats.policy_loss) << ','
            << format_double(u.stats.value_loss) << ',' << format_double(u.stats.entropy) << ','
            << u.stats.samples << '\n';
    write_file(seed_dir / "learning_curve.csv", curve.str());

    std::ostringstream bcis;
    bcis << "# config_hash=" << hash << " seed=" << seed << "\nepisode,step_end,bci_apples,bci_raw_env\n";
    for (const auto& log : r.logs) {
      const auto a = bci(log, structure, RewardBasis::Apples);
      const auto e = bci(log, structure, RewardBasis::RawEnv);
      bcis << log.episode << ',' << log.step_end << ',' << (a.value ? format_double(*a.value) : "") << ','
           << (e.value ? format_double(*e.value) : "") << '\n';
    }
    write_file(seed_dir / "bci.csv", bcis.str());
    if (!r.pbt.is_null()) write_file(seed_dir / "pbt.json", r.pbt.dump(2) + "\n");
    std::lock_guard lock(progress_mu);
    progress << "[" << config.name << "] seed " << seed << ": " << (r.ok ? "ok" : "failed: " + r.error) << "\n";
  };
  if (config.seed_parallel && config.seeds.size() > 1) {
    std::vector<std::jthread> threads;
    for (std::size_t k = 0; k < config.seeds.size(); ++k) threads.emplace_back(run_one, k);
  } else {
    for (std::size_t k = 0; k < config.seeds.size(); ++k) run_one(k);
  }

  // Report assembly: single writer.
  json report;
  report["config_hash"] = hash;
  report["env_hash"] = config.env_hash();
  report["topology_hash"] = config.topology_hash();
  report["name"] = config.name;
  report["preference"] = config.preference.label();
  report["profile"] = profile_json(profile);
  if (profile.is_baseline()) report["protocol"] = kBaselineProtocol;
  report["effective_config"] = config.to_json();
  json tj = topology_report(topo);
  report["topology"] = tj;
  report["tctr"] = {{"lower", range.lower}, {"upper", range.upper}};
  json wj = json::array();
  for (int s = 0; s < 3; ++s) wj.push_back({{"begin", windows[s].begin}, {"end", windows[s].end}});
  report["stage_windows"] = wj;
  report["episode_len"] = config.env.episode_len;
  const auto episodes = config.effective_total_steps() / config.env.episode_len;
  report["episodes"] = episodes;
  report["num_agents"] = n;
  report["plot_stride"] = config.plot_stride > 0 ? config.plot_stride : std::max<std::int64_t>(1, episodes / 500);
  report["bci_basis"] = "apples";
  report["bci_sampling"] = "per-episode over stage 3";

  std::ostringstream stage_csv;
  stage_csv << "# config_hash=" << hash << "\nseed,quantity,stage,agent,episodes,mean_summed,median,q1,q3\n";
  std::vector<EpisodeLog> pooled;
  std::vector<std::optional<double>> pooled_bci;
  std::vector<double> effort(n, 0.0), apples(n, 0.0);
  std::vector<double> util_sum(static_cast<std::size_t>(episodes), 0.0);
  std::vector<int> util_count(static_cast<std::size_t>(episodes), 0);
  json seeds = json::array();
  for (const auto& r : results) {
    json sj;
    sj["seed"] = r.seed;
    sj["status"] = r.ok ? "ok" : "failed";
    if (!r.ok) {
      sj["error"] = r.error;
      outcome.all_ok = false;
    }
    const auto seed_rel = fs::path("seed_" + std::to_string(r.seed));
    sj["episodes_csv"] = (seed_rel / "episodes.csv").generic_string();
    sj["bci_csv"] = (seed_rel / "bci.csv").generic_string();
    sj["learning_curve_csv"] = (seed_rel / "learning_curve.csv").generic_string();
    sj["episodes_completed"] = r.logs.size();
    // Data rows are 1-based, counted after the two header lines.
    std::int64_t first = -1, last = -1;
    std::vector<std::optional<double>> seed_bci;
    double util = 0.0;
    for (std::size_t e = 0; e < r.logs.size(); ++e) {
      const auto& log = r.logs[e];
      if (log.episode >= 0 && log.episode < episodes) {
        util_sum[static_cast<std::size_t>(log.episode)] += utilitarian(log);
        util_count[static_cast<std::size_t>(log.episode)] += 1;
      }
      if (!windows.stage3.contains_episode_end(log.step_end)) continue;
      if (first < 0) first = static_cast<std::int64_t>(e);
      last = static_cast<std::int64_t>(e);
      seed_bci.push_back(bci(log, structure).value);
      util += utilitarian(log);
      for (int i = 0; i < n; ++i) {
        effort[i] += static_cast<double>(log.agents[i].clean_count);
        apples[i] += static_cast<double>(log.agents[i].apples);
      }
    }
    if (first >= 0) {
      sj["stage3_rows"] = {first * n + 1, (last + 1) * n};
      const auto d = summarize(seed_bci);
      sj["bci_stage3"] = distribution_json(d);
      if (d.count > 0) sj["bci_mean"] = d.mean;
      sj["utilitarian_mean"] = util / static_cast<double>(last - first + 1);
      pooled_bci.insert(pooled_bci.end(), seed_bci.begin(), seed_bci.end());
    }
    try {
      stage_csv << stage_rows_csv(std::to_string(r.seed), r.logs, windows);
    } catch (const std::invalid_argument& e) {
      sj["stage_table_error"] = e.what();
    }
    pooled.insert(pooled.end(), r.logs.begin(), r.logs.end());
    seeds.push_back(sj);
  }
  report["seeds"] = seeds;
  try {
    stage_csv << stage_rows_csv("all", pooled, windows);
  } catch (const std::invalid_argument& e) {
    report["stage_table_error"] = e.what();
  }
  write_file(outcome.dir / "stage_table.csv", stage_csv.str());
  report["stage_table_csv"] = "stage_table.csv";
  if (!pooled_bci.empty()) {
    auto d = distribution_json(summarize(pooled_bci));
    d["tctr"] = {range.lower, range.upper};
    report["bci_stage3"] = d;
  }
  json sci_j = json::array();
  for (int i = 0; i < n; ++i) sci_j.push_back(sci(effort[i], apples[i]));
  report["sci_stage3"] = sci_j;
  json util_j = json::array();
  for (std::size_t e = 0; e < util_sum.size(); ++e)
    util_j.push_back(util_count[e] ? json(util_sum[e] / util_count[e]) : json(nullptr));
  report["utilitarian_series"] = util_j;
  report["status"] = outcome.all_ok ? "ok" : "partial";

  outcome.report_path = outcome.dir / "report.json";
  write_file(outcome.report_path, report.dump(2) + "\n");
  outcome.report = std::move(report);
  return outcome;
}

SweepOutcome cmd_sweep(const RunConfig& base, const std::vector<std::string>& presets, std::ostream& progress) {
  if (presets.size() < 2) throw ConfigError("sweep needs at least two presets");
  SweepOutcome sweep;
  std::vector<ReportBundle> bundles;
  for (const auto& preset : presets) {
    RunConfig c = base;
    c.preference = PreferenceSource{preset, {}};
    c.name = base.name + "-" + preset;
    c.validate();
  }
  for (const auto& preset : presets) {
    RunConfig c = base;
    c.preference = PreferenceSource{preset, {}};
    c.name = base.name + "-" + preset;
    auto run = cmd_run(c, progress);
    sweep.all_ok = sweep.all_ok && run.all_ok;
    bundles.push_back({run.report_path, run.report});
    sweep.runs.push_back(std::move(run));
  }
  const auto dir = output_root(base.output_dir) / (base.name + "-sweep");
  fs::create_directories(dir);
  std::ostringstream text;
  json comparison;
  try {
    comparison = analyze_reports(bundles, text);
  } catch (const std::exception& e) {
    comparison = {{"error", e.what()}};
    sweep.all_ok = false;
  }
  json runs = json::array();
  for (const auto& r : sweep.runs) runs.push_back(fs::relative(r.report_path, dir).generic_string());
  comparison["reports"] = runs;
  sweep.comparison_path = dir / "comparison.json";
  write_file(sweep.comparison_path, comparison.dump(2) + "\n");
  write_file(dir / "comparison.txt", text.str());
  sweep.comparison = std::move(comparison);
  return sweep;
}

}  // namespace srim
