#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace srim {

class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Edge = std::pair<int, int>;
// Sorted, duplicate-free list of vertex ids.
using VertexSet = std::vector<int>;

// Undirected simple connected graph over agent node ids 0..n-1.
class Topology {
 public:
  // Validates and normalizes the edge list (u < v, sorted, deduplicated).
  // Throws TopologyError unless the graph is simple, connected and has n >= 2.
  Topology(int n, const std::vector<Edge>& edges, std::string label = {});

  int size() const { return n_; }
  bool adjacent(int i, int j) const { return adj_[static_cast<std::size_t>(i) * n_ + j] != 0; }
  const VertexSet& neighbors(int i) const { return nbrs_[i]; }
  int degree(int i) const { return static_cast<int>(nbrs_[i].size()); }
  const std::vector<Edge>& edges() const { return edges_; }
  const std::string& label() const { return label_; }

  // Canonical edge-list text (header + sorted pairs).
  std::string to_edge_list() const;

  bool operator==(const Topology& o) const { return n_ == o.n_ && edges_ == o.edges_; }

 private:
  int n_;
  std::vector<std::uint8_t> adj_;
  std::vector<VertexSet> nbrs_;
  std::vector<Edge> edges_;
  std::string label_;
};

/// Connected components of an arbitrary edge list, each sorted.
std::vector<VertexSet> connected_components(int n, const std::vector<Edge>& edges);

/// Names accepted by build_named: complete, cycle, wheel, star, bipartite23, house.
const std::vector<std::string>& named_topologies();

/// Fixed catalog graphs. All listed families are 5-vertex graphs.
Topology build_named(std::string_view name, int n);

/// Accepts "star", "star5", "house5" etc.; a trailing count must match.
Topology build_named(std::string_view spec);

/// Parses `n <count>` followed by `u v` lines; `#` starts a comment.
Topology load_edge_list(std::string_view text, std::string label = {});
Topology load_edge_list_file(const std::filesystem::path& path);

struct StructuralProfile {
  std::vector<int> degree;
  std::vector<std::vector<int>> distance;  // hop counts
  std::vector<double> betweenness;         // unnormalized, endpoints excluded
  std::vector<double> burt_constraint;     // C_i
  std::vector<double> bridging;            // 1 - C_i
  VertexSet max_betweenness_set;
};

// Relative tolerance used to detect ties at the betweenness maximum.
inline constexpr double kBetweennessTieTolerance = 1e-9;

StructuralProfile analyze(const Topology& t);

/// Normalized tie shares p_ij = (a_ij + a_ji) / sum_k (a_ik + a_ki).
std::vector<std::vector<double>> tie_shares(const Topology& t);

std::vector<int> bfs_distances(const Topology& t, int source);
std::vector<double> betweenness_centrality(const Topology& t);
std::vector<double> burt_constraint(const Topology& t);

struct PortfolioSet {
  std::vector<VertexSet> nearest;
  std::vector<VertexSet> clique;
  std::vector<VertexSet> hbn;
};

std::vector<VertexSet> nearest_neighbors(const Topology& t);

/// k in clique(i) iff i and k share at least one triangle.
std::vector<VertexSet> clique_neighbors(const Topology& t);

/// m in hbn(i) iff m != i and m lies on a shortest path from i to some
/// maximal-betweenness vertex other than i (the target itself included).
/// A vertex that is the unique betweenness maximum gets an empty set.
std::vector<VertexSet> hbn_neighbors(const Topology& t, const StructuralProfile& profile);

PortfolioSet portfolios(const Topology& t, const StructuralProfile& profile);

struct BridgingRange {
  double lower;
  double upper;
};

/// Topology-constrained range of the bridging-capacity index:
/// [min_i (1 - C_i), max_i (1 - C_i)].
BridgingRange tctr(const StructuralProfile& profile);

}  // namespace srim
