#include "srim/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "srim/analysis.hpp"
#include "srim/config.hpp"
#include "srim/metrics.hpp"
#include "srim/runner.hpp"

namespace srim {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string set_text(const VertexSet& s) {
  std::string out = "{";
  for (std::size_t k = 0; k < s.size(); ++k) out += (k ? "," : "") + std::to_string(s[k]);
  return out + "}";
}

VertexSet targets_of(const StructuralProfile& p, int i) {
  VertexSet out;
  for (int v : p.max_betweenness_set)
    if (v != i) out.push_back(v);
  return out;
}

}  // namespace

json topology_report(const Topology& t) {
  const auto p = analyze(t);
  const auto ports = portfolios(t, p);
  const auto range = tctr(p);
  json vertices = json::array();
  for (int i = 0; i < t.size(); ++i)
    vertices.push_back({{"id", i},
                        {"degree", p.degree[i]},
                        {"betweenness", p.betweenness[i]},
                        {"constraint", p.burt_constraint[i]},
                        {"bridging", p.bridging[i]},
                        {"nearest", ports.nearest[i]},
                        {"clique", ports.clique[i]},
                        {"hbn_targets", targets_of(p, i)},
                        {"hbn", ports.hbn[i]}});
  json edges = json::array();
  for (const auto& [u, v] : t.edges()) edges.push_back({u, v});
  return {{"label", t.label()},
          {"n", t.size()},
          {"edges", edges},
          {"vertices", vertices},
          {"max_betweenness_set", p.max_betweenness_set},
          {"tctr", {{"lower", range.lower}, {"upper", range.upper}}}};
}

void cmd_topo(const Topology& t, std::ostream& out) {
  const auto p = analyze(t);
  const auto ports = portfolios(t, p);
  const auto range = tctr(p);
  out << "topology " << (t.label().empty() ? "(unnamed)" : t.label()) << ": n=" << t.size()
      << " edges=" << t.edges().size() << "\n";
  out << std::left << std::setw(7) << "vertex" << std::setw(7) << "degree" << std::setw(12) << "betweenness"
      << std::setw(9) << "1-C" << std::setw(12) << "clique" << std::setw(12) << "hbn_targets" << "hbn\n";
  out << std::fixed << std::setprecision(3);
  for (int i = 0; i < t.size(); ++i)
    out << std::setw(7) << i << std::setw(7) << p.degree[i] << std::setw(12) << p.betweenness[i] << std::setw(9)
        << p.bridging[i] << std::setw(12) << set_text(ports.clique[i]) << std::setw(12)
        << set_text(targets_of(p, i)) << set_text(ports.hbn[i]) << "\n";
  out << "max_betweenness " << set_text(p.max_betweenness_set) << "\n";
  out << "TCTR " << range.lower << " - " << range.upper << "\n";
  out.unsetf(std::ios::floatfield);
}

ReportBundle load_report(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open report '" + path.string() + "'");
  ReportBundle b{path, {}};
  try {
    b.report = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("report '" + path.string() + "': " + e.what());
  }
  for (const char* key : {"config_hash", "env_hash", "topology_hash", "seeds", "preference"})
    if (!b.report.contains(key)) throw std::runtime_error("report '" + path.string() + "' lacks '" + key + "'");
  const auto hash = b.report["config_hash"].get<std::string>();
  for (const auto& s : b.report["seeds"]) {
    const auto csv = path.parent_path() / s["episodes_csv"].get<std::string>();
    std::ifstream f(csv);
    std::string header;
    if (!f || !std::getline(f, header)) throw std::runtime_error("cannot read '" + csv.string() + "'");
    if (header.find("config_hash=" + hash) == std::string::npos)
      throw std::runtime_error("'" + csv.string() + "' was written under a different config hash than '" +
                               path.string() + "'");
  }
  return b;
}

nlohmann::json analyze_reports(const std::vector<ReportBundle>& reports, std::ostream& out) {
  if (reports.size() < 2) throw std::invalid_argument("nothing to compare: analyze needs at least two reports");
  const auto& first = reports.front().report;
  for (const auto& r : reports) {
    if (r.report["env_hash"] != first["env_hash"])
      throw std::invalid_argument("reports come from different environments: '" + reports.front().path.string() +
                                  "' vs '" + r.path.string() + "'");
    if (r.report["topology_hash"] != first["topology_hash"])
      throw std::invalid_argument("reports use different topologies: '" + reports.front().path.string() + "' vs '" +
                                  r.path.string() + "'");
  }
  std::map<std::string, int> label_count;
  for (const auto& r : reports) label_count[r.report["preference"].get<std::string>()]++;
  std::vector<PreferenceGroup> bci_groups, util_groups;
  for (const auto& r : reports) {
    auto label = r.report["preference"].get<std::string>();
    if (label_count[label] > 1) label += "@" + r.report.value("name", r.path.parent_path().filename().string());
    PreferenceGroup b{label, {}}, u{label, {}};
    for (const auto& s : r.report["seeds"]) {
      if (s.value("status", "") != "ok") continue;
      if (s.contains("bci_mean")) b.samples.push_back(s["bci_mean"].get<double>());
      if (s.contains("utilitarian_mean")) u.samples.push_back(s["utilitarian_mean"].get<double>());
    }
    bci_groups.push_back(std::move(b));
    util_groups.push_back(std::move(u));
  }
  json result;
  result["env_hash"] = first["env_hash"];
  result["topology_hash"] = first["topology_hash"];
  json reports_j = json::array();
  for (const auto& r : reports) reports_j.push_back(r.path.generic_string());
  result["inputs"] = reports_j;
  result["samples"] = "per-seed stage-3 means";
  json metrics = json::object();
  for (const auto* groups : {&bci_groups, &util_groups}) {
    const std::string metric = groups == &bci_groups ? "bci" : "utilitarian";
    const auto cmp = compare_preferences(*groups, metric);
    json pairs = json::array();
    out << "metric " << metric << "\n";
    out << "  group        n    mean          ci95\n";
    for (std::size_t g = 0; g < groups->size(); ++g) {
      out << "  " << std::left << std::setw(12) << (*groups)[g].label << std::right << std::setw(2)
          << cmp.summaries[g].n << "  " << std::setw(12) << format_double(cmp.summaries[g].mean) << "  ["
          << format_double(cmp.intervals[g].lower) << ", " << format_double(cmp.intervals[g].upper) << "]\n";
    }
    for (const auto& p : cmp.pairs) {
      pairs.push_back({{"first", p.first},
                       {"second", p.second},
                       {"t", std::isfinite(p.t) ? json(p.t) : json(p.t > 0 ? "inf" : "-inf")},
                       {"dof", p.dof},
                       {"p_raw", p.p_raw},
                       {"p_adjusted", p.p_adjusted},
                       {"significant", p.significant},
                       {"degenerate", p.degenerate}});
      out << "  " << p.first << " vs " << p.second << ": t=" << format_double(p.t) << " dof=" << format_double(p.dof)
          << " p=" << format_double(p.p_raw) << " p_bonferroni=" << format_double(p.p_adjusted)
          << (p.significant ? " significant" : " not significant") << "\n";
    }
    std::string ordering;
    for (std::size_t k = 0; k < cmp.ascending.size(); ++k) {
      if (k > 0) {
        const auto mean_of = [&](const std::string& label) {
          for (std::size_t g = 0; g < groups->size(); ++g)
            if ((*groups)[g].label == label) return cmp.summaries[g].mean;
          return 0.0;
        };
        ordering += mean_of(cmp.ascending[k - 1]) == mean_of(cmp.ascending[k]) ? " = " : " < ";
      }
      ordering += cmp.ascending[k];
    }
    out << "  ordering by mean: " << ordering << "\n";
    json groups_j = json::array();
    for (std::size_t g = 0; g < groups->size(); ++g)
      groups_j.push_back({{"label", (*groups)[g].label},
                          {"n", cmp.summaries[g].n},
                          {"mean", cmp.summaries[g].mean},
                          {"variance", cmp.summaries[g].variance},
                          {"ci95", {cmp.intervals[g].lower, cmp.intervals[g].upper}}});
    metrics[metric] = {{"groups", groups_j}, {"pairs", pairs}, {"ascending", cmp.ascending}, {"ordering", ordering}};
  }
  result["metrics"] = metrics;
  return result;
}

json cmd_analyze(const std::vector<fs::path>& paths, std::ostream& out) {
  if (paths.size() < 2) throw std::invalid_argument("nothing to compare: analyze needs at least two reports");
  std::vector<ReportBundle> bundles;
  for (const auto& p : paths) bundles.push_back(load_report(p));
  return analyze_reports(bundles, out);
}

namespace {

struct LoadedRun {
  json report;
  std::vector<std::vector<EpisodeLog>> seeds;
  int n = 0;
  std::int64_t episode_len = 1;
};

LoadedRun load_run(const fs::path& path) {
  auto bundle = load_report(path);
  LoadedRun run;
  run.report = bundle.report;
  run.n = run.report.at("num_agents").get<int>();
  run.episode_len = run.report.at("episode_len").get<std::int64_t>();
  for (const auto& s : run.report["seeds"]) {
    auto csv = read_episodes_csv(path.parent_path() / s["episodes_csv"].get<std::string>());
    for (auto& log : csv.logs) log.step_end = (log.episode + 1) * run.episode_len;
    run.seeds.push_back(std::move(csv.logs));
  }
  return run;
}

StageWindows windows_of(const json& report) {
  const auto& w = report.at("stage_windows");
  StageWindows s;
  s.stage1 = {w[0]["begin"].get<std::int64_t>(), w[0]["end"].get<std::int64_t>()};
  s.stage2 = {w[1]["begin"].get<std::int64_t>(), w[1]["end"].get<std::int64_t>()};
  s.stage3 = {w[2]["begin"].get<std::int64_t>(), w[2]["end"].get<std::int64_t>()};
  return s;
}

void write_series(const LoadedRun& run, Quantity q, const PlotOptions& o, int stride, std::ostream& out) {
  // Per-agent mean over seeds for each episode index, then trailing average, then stride sampling.
  std::size_t episodes = 0;
  for (const auto& s : run.seeds) episodes = std::max(episodes, s.size());
  std::vector<std::vector<double>> sum(episodes, std::vector<double>(run.n, 0.0));
  std::vector<int> count(episodes, 0);
  for (const auto& s : run.seeds)
    for (const auto& log : s) {
      const auto e = static_cast<std::size_t>(log.episode);
      if (e >= episodes) continue;
      for (int i = 0; i < run.n; ++i) sum[e][i] += quantity_of(log.agents[i], q);
      count[e]++;
    }
  std::vector<std::vector<double>> mean(episodes, std::vector<double>(run.n, 0.0));
  for (std::size_t e = 0; e < episodes; ++e)
    for (int i = 0; i < run.n; ++i) mean[e][i] = count[e] ? sum[e][i] / count[e] : 0.0;
  out << "# series quantity=" << to_string(q) << " stride=" << stride << " window=" << o.window << "\n";
  out << "episode";
  for (int i = 0; i < run.n; ++i) out << " agent" << i;
  out << "\n";
  const std::size_t points = episodes / static_cast<std::size_t>(stride);
  for (std::size_t k = 0; k < points; ++k) {
    const std::size_t e = k * static_cast<std::size_t>(stride);
    out << e;
    const std::size_t lo = e + 1 >= static_cast<std::size_t>(o.window) ? e + 1 - o.window : 0;
    for (int i = 0; i < run.n; ++i) {
      double s = 0.0;
      for (std::size_t j = lo; j <= e; ++j) s += mean[j][i];
      out << ' ' << format_double(s / static_cast<double>(e - lo + 1));
    }
    out << "\n";
  }
}

void write_stage_sums(const LoadedRun& run, Quantity q, std::ostream& out) {
  std::vector<EpisodeLog> pooled;
  for (const auto& s : run.seeds) pooled.insert(pooled.end(), s.begin(), s.end());
  out << "# stage_sums quantity=" << to_string(q) << " pooled over seeds\n";
  out << "stage agent episodes mean_summed median q1 q3\n";
  for (const auto& c : stage_aggregate(pooled, windows_of(run.report), q))
    out << (c.stage + 1) << ' ' << c.agent << ' ' << c.episodes << ' ' << format_double(c.mean_summed) << ' '
        << format_double(c.median) << ' ' << format_double(c.q1) << ' ' << format_double(c.q3) << "\n";
}

}  // namespace

void cmd_plotdata(const fs::path& report_path, const PlotOptions& o, std::ostream& out) {
  const auto& kinds = kFigureKinds;
  if (std::find(std::begin(kinds), std::end(kinds), o.figure) == std::end(kinds))
    throw std::invalid_argument("unknown figure kind '" + o.figure +
                                "' (expected base-reward, aggressiveness, clean-count or bci-dist)");
  if (o.window < 1) throw std::invalid_argument("window must be >= 1");
  if (o.stride < 0) throw std::invalid_argument("stride must be >= 0");
  const auto run = load_run(report_path);
  const int stride = o.stride > 0 ? o.stride : run.report.value("plot_stride", 1);
  out << "# figure=" << o.figure << " config_hash=" << run.report["config_hash"].get<std::string>()
      << " preference=" << run.report["preference"].get<std::string>() << " seeds=" << run.seeds.size() << "\n";
  for (int i = 0; i < run.n; ++i) out << "# color agent" << i << "=" << i << "\n";
  if (o.figure == "base-reward") {
    write_series(run, Quantity::EnvReward, o, stride, out);
  } else if (o.figure == "aggressiveness") {
    write_series(run, Quantity::FireCount, o, stride, out);
    out << "\n";
    write_stage_sums(run, Quantity::FireCount, out);
  } else if (o.figure == "clean-count") {
    write_series(run, Quantity::CleanCount, o, stride, out);
    out << "\n";
    write_stage_sums(run, Quantity::CleanCount, out);
  } else {
    const auto windows = windows_of(run.report);
    // Rebuild the structural profile from the report's edge list.
    const auto& tj = run.report.at("topology");
    std::vector<Edge> edges;
    for (const auto& e : tj.at("edges")) edges.push_back({e[0].get<int>(), e[1].get<int>()});
    const Topology topo(tj.at("n").get<int>(), edges, tj.value("label", ""));
    const auto profile = analyze(topo);
    const auto range = tctr(profile);
    out << "# bci_dist basis=apples per-episode tctr_lower=" << format_double(range.lower)
        << " tctr_upper=" << format_double(range.upper) << "\n";
    out << "scope stage count dropped median q1 q3 mean\n";
    auto emit = [&](const std::string& scope, const std::vector<const std::vector<EpisodeLog>*>& sets) {
      for (int s = 0; s < 3; ++s) {
        std::vector<std::optional<double>> samples;
        for (const auto* logs : sets)
          for (const auto& log : *logs)
            if (windows[s].contains_episode_end(log.step_end)) samples.push_back(bci(log, profile).value);
        const auto d = summarize(samples);
        out << scope << ' ' << (s + 1) << ' ' << d.count << ' ' << d.dropped << ' ' << format_double(d.median) << ' '
            << format_double(d.q1) << ' ' << format_double(d.q3) << ' ' << format_double(d.mean) << "\n";
      }
    };
    std::vector<const std::vector<EpisodeLog>*> all;
    for (std::size_t k = 0; k < run.seeds.size(); ++k) {
      emit("seed" + std::to_string(run.report["seeds"][k]["seed"].get<std::uint64_t>()), {&run.seeds[k]});
      all.push_back(&run.seeds[k]);
    }
    emit("all", all);
  }
}

}  // namespace srim
