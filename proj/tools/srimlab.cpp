#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "srim/commands.hpp"
#include "srim/config.hpp"
#include "srim/runner.hpp"
#include "srim/topology.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

srim::Topology load_topology(const std::string& named, const std::string& file) {
  if (named.empty() == file.empty()) throw std::invalid_argument("give exactly one of --named and --file");
  return named.empty() ? srim::load_edge_list_file(file) : srim::build_named(named);
}

srim::RunConfig load_config(const std::string& path, const std::string& output_dir) {
  auto config = srim::RunConfig::load(path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  return config;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Structural-preference experiments on sequential social dilemmas"};
  app.require_subcommand(1);

  auto* topo = app.add_subcommand("topo", "Print the structural report of a topology");
  std::string topo_named, topo_file;
  bool topo_json = false;
  topo->add_option("--named", topo_named, "Catalog topology, e.g. star5 or house5");
  topo->add_option("--file", topo_file, "Edge-list file");
  topo->add_flag("--json", topo_json, "Emit JSON instead of a table");

  auto* run = app.add_subcommand("run", "Train every seed of a run config and write its report");
  std::string run_config, run_output;
  run->add_option("--config", run_config, "Run config (JSON)")->required();
  run->add_option("--output-dir", run_output, "Override the config's output_dir");

  auto* sweep = app.add_subcommand("sweep", "Run one config under several preference presets and compare them");
  std::string sweep_config, sweep_output;
  std::vector<std::string> presets{"NN", "CN", "HBN"};
  sweep->add_option("--config", sweep_config, "Base run config (JSON)")->required();
  sweep->add_option("--presets", presets, "Preference presets")->delimiter(',')->capture_default_str();
  sweep->add_option("--output-dir", sweep_output, "Override the config's output_dir");

  auto* analyze = app.add_subcommand("analyze", "Pairwise comparison of run reports");
  std::vector<std::string> reports;
  std::string analyze_out;
  analyze->add_option("reports", reports, "report.json files")->required();
  analyze->add_option("--out", analyze_out, "Write the comparison as JSON");

  auto* plot = app.add_subcommand("plotdata", "Emit plot-ready columnar text from a report");
  std::string plot_report, plot_out;
  srim::PlotOptions plot_options;
  plot->add_option("--report", plot_report, "report.json")->required();
  plot->add_option("--figure", plot_options.figure, "base-reward, aggressiveness, clean-count or bci-dist")
      ->required();
  plot->add_option("--stride", plot_options.stride, "Episode stride (0: the report's stride)");
  plot->add_option("--window", plot_options.window, "Trailing moving-average width in episodes");
  plot->add_option("--out", plot_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*topo) {
      const auto t = load_topology(topo_named, topo_file);
      if (topo_json)
        std::cout << srim::topology_report(t).dump(2) << "\n";
      else
        srim::cmd_topo(t, std::cout);
      return 0;
    }
    if (*run) {
      const auto outcome = srim::cmd_run(load_config(run_config, run_output), std::cerr);
      std::cout << outcome.report_path.string() << "\n";
      return outcome.all_ok ? 0 : kExitRuntime;
    }
    if (*sweep) {
      const auto outcome = srim::cmd_sweep(load_config(sweep_config, sweep_output), presets, std::cerr);
      for (const auto& r : outcome.runs) std::cout << r.report_path.string() << "\n";
      std::cout << outcome.comparison_path.string() << "\n";
      return outcome.all_ok ? 0 : kExitRuntime;
    }
    if (*analyze) {
      std::vector<fs::path> paths(reports.begin(), reports.end());
      const auto result = srim::cmd_analyze(paths, std::cout);
      if (!analyze_out.empty()) write_json(result, analyze_out);
      return 0;
    }
    if (*plot) {
      if (plot_out.empty()) {
        srim::cmd_plotdata(plot_report, plot_options, std::cout);
      } else {
        std::ofstream out(plot_out);
        if (!out) throw std::runtime_error("cannot write '" + plot_out + "'");
        srim::cmd_plotdata(plot_report, plot_options, out);
      }
      return 0;
    }
  } catch (const srim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const srim::TopologyError& e) {
    std::cerr << "topology error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
