#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "srim/topology.hpp"

namespace srim {

nlohmann::json topology_report(const Topology& t);

/// Prints the per-vertex structural table followed by the bridging range.
void cmd_topo(const Topology& t, std::ostream& out);

struct ReportBundle {
  std::filesystem::path path;
  nlohmann::json report;
};

/// Loads a report and checks that every per-seed log carries its config hash.
ReportBundle load_report(const std::filesystem::path& path);

/// Pairwise preference comparison of stage-3 BCI and utilitarian return.
/// Requires at least two reports sharing env and topology.
nlohmann::json cmd_analyze(const std::vector<std::filesystem::path>& reports, std::ostream& out);
nlohmann::json analyze_reports(const std::vector<ReportBundle>& reports, std::ostream& out);

inline constexpr const char* kFigureKinds[] = {"base-reward", "aggressiveness", "clean-count", "bci-dist"};

struct PlotOptions {
  std::string figure;
  int stride = 0;  // 0: the report's stride
  int window = 1;  // trailing moving-average width in episodes; 1 = raw
};

void cmd_plotdata(const std::filesystem::path& report, const PlotOptions& options, std::ostream& out);

}  // namespace srim
