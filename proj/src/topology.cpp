#include "srim/topology.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <deque>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace srim {

namespace {

std::string format_components(const std::vector<VertexSet>& comps) {
  std::ostringstream out;
  for (std::size_t c = 0; c < comps.size(); ++c) {
    if (c) out << ' ';
    out << '{';
    for (std::size_t k = 0; k < comps[c].size(); ++k) {
      if (k) out << ',';
      out << comps[c][k];
    }
    out << '}';
  }
  return out.str();
}

std::vector<Edge> complete_edges(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) e.emplace_back(i, j);
  return e;
}

}  // namespace

Topology::Topology(int n, const std::vector<Edge>& edges, std::string label)
    : n_(n), label_(std::move(label)) {
  if (n < 2) throw TopologyError("topology needs at least 2 vertices, got " + std::to_string(n));
  adj_.assign(static_cast<std::size_t>(n) * n, 0);
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n)
      throw TopologyError("vertex out of range in edge (" + std::to_string(u) + "," +
                          std::to_string(v) + ") for n=" + std::to_string(n));
    if (u == v) throw TopologyError("self-loop at vertex " + std::to_string(u));
    adj_[static_cast<std::size_t>(u) * n + v] = 1;
    adj_[static_cast<std::size_t>(v) * n + u] = 1;
  }
  nbrs_.assign(n, {});
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (adjacent(i, j)) nbrs_[i].push_back(j);
  for (int i = 0; i < n; ++i)
    for (int j : nbrs_[i])
      if (i < j) edges_.emplace_back(i, j);

  auto comps = connected_components(n, edges_);
  if (comps.size() != 1)
    throw TopologyError("graph is disconnected: components " + format_components(comps));
}

std::string Topology::to_edge_list() const {
  std::ostringstream out;
  out << "n " << n_ << '\n';
  for (auto [u, v] : edges_) out << u << ' ' << v << '\n';
  return out.str();
}

std::vector<VertexSet> connected_components(int n, const std::vector<Edge>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= n || v >= n) continue;
    int a = find(u), b = find(v);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<VertexSet> comps;
  std::vector<int> index(n, -1);
  for (int i = 0; i < n; ++i) {
    int r = find(i);
    if (index[r] < 0) {
      index[r] = static_cast<int>(comps.size());
      comps.emplace_back();
    }
    comps[index[r]].push_back(i);
  }
  return comps;
}

const std::vector<std::string>& named_topologies() {
  static const std::vector<std::string> names{"complete", "cycle", "wheel",
                                              "star", "bipartite23", "house"};
  return names;
}

Topology build_named(std::string_view name, int n) {
  const auto& names = named_topologies();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw TopologyError("unknown topology name '" + std::string(name) + "'");
  if (n != 5)
    throw TopologyError("topology '" + std::string(name) + "' is defined for 5 vertices, got " +
                        std::to_string(n));
  std::vector<Edge> e;
  if (name == "complete") {
    e = complete_edges(5);
  } else if (name == "cycle") {
    e = {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0}};
  } else if (name == "wheel") {
    e = {{0, 1}, {0, 2}, {0, 3}, {0, 4}, {1, 2}, {2, 3}, {3, 4}, {4, 1}};
  } else if (name == "star") {
    e = {{0, 1}, {0, 2}, {0, 3}, {0, 4}};
  } else if (name == "bipartite23") {
    for (int a : {0, 1})
      for (int b : {2, 3, 4}) e.emplace_back(a, b);
  } else {  // house: square 0-1-2-3 with roof 4 over 1-2
    e = {{0, 1}, {0, 3}, {3, 2}, {1, 2}, {1, 4}, {2, 4}};
  }
  return Topology(5, e, std::string(name));
}

Topology build_named(std::string_view spec) {
  std::size_t cut = spec.size();
  while (cut > 0 && std::isdigit(static_cast<unsigned char>(spec[cut - 1]))) --cut;
  std::string_view base = spec.substr(0, cut);
  std::string_view digits = spec.substr(cut);
  // "bipartite23" ends in digits that are part of the name.
  const auto& names = named_topologies();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return build_named(spec, 5);
  if (base == "bipartite" && digits.size() > 2 && digits.substr(0, 2) == "23") {
    base = "bipartite23";
    digits = digits.substr(2);
  }
  int n = 5;
  if (!digits.empty()) {
    auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
    if (ec != std::errc{}) throw TopologyError("bad topology spec '" + std::string(spec) + "'");
  }
  return build_named(base, n);
}

Topology load_edge_list(std::string_view text, std::string label) {
  std::istringstream in{std::string(text)};
  std::string line;
  int n = -1;
  int lineno = 0;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    auto fail = [&](const std::string& why) {
      throw TopologyError("edge list line " + std::to_string(lineno) + ": " + why);
    };
    if (n < 0) {
      if (first != "n" || !(ls >> n) || n < 0) fail("expected header 'n <count>'");
      std::string extra;
      if (ls >> extra) fail("trailing tokens after header");
      continue;
    }
    int u = 0, v = 0;
    try {
      std::size_t used = 0;
      u = std::stoi(first, &used);
      if (used != first.size()) fail("bad vertex '" + first + "'");
    } catch (const std::logic_error&) {
      fail("bad vertex '" + first + "'");
    }
    if (!(ls >> v)) fail("expected 'u v'");
    std::string extra;
    if (ls >> extra) fail("trailing tokens");
    if (u == v) fail("self-loop at vertex " + std::to_string(u));
    if (u < 0 || v < 0 || u >= n || v >= n)
      fail("vertex out of range (" + std::to_string(u) + "," + std::to_string(v) + ")");
    edges.emplace_back(std::min(u, v), std::max(u, v));
  }
  if (n < 0) throw TopologyError("edge list is missing the 'n <count>' header");
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return Topology(n, edges, std::move(label));
}

Topology load_edge_list_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TopologyError("cannot open edge list '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_edge_list(buf.str(), path.stem().string());
}

std::vector<int> bfs_distances(const Topology& t, int source) {
  std::vector<int> dist(t.size(), -1);
  std::deque<int> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop_front();
    for (int v : t.neighbors(u))
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push_back(v);
      }
  }
  return dist;
}

// Brandes accumulation over every source; each unordered pair is seen twice.
std::vector<double> betweenness_centrality(const Topology& t) {
  const int n = t.size();
  std::vector<double> cb(n, 0.0);
  for (int s = 0; s < n; ++s) {
    std::vector<int> order;
    std::vector<std::vector<int>> preds(n);
    std::vector<double> sigma(n, 0.0);
    std::vector<int> dist(n, -1);
    sigma[s] = 1.0;
    dist[s] = 0;
    std::deque<int> queue{s};
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      order.push_back(v);
      for (int w : t.neighbors(v)) {
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
        if (dist[w] == dist[v] + 1) {
          sigma[w] += sigma[v];
          preds[w].push_back(v);
        }
      }
    }
    std::vector<double> delta(n, 0.0);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      int w = *it;
      for (int v : preds[w]) delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
      if (w != s) cb[w] += delta[w];
    }
  }
  for (double& c : cb) c /= 2.0;
  return cb;
}

std::vector<std::vector<double>> tie_shares(const Topology& t) {
  const int n = t.size();
  std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) {
    double total = 0.0;
    for (int j = 0; j < n; ++j) total += (t.adjacent(i, j) ? 1.0 : 0.0) + (t.adjacent(j, i) ? 1.0 : 0.0);
    if (total <= 0.0) throw TopologyError("vertex " + std::to_string(i) + " has degree 0");
    for (int j = 0; j < n; ++j)
      p[i][j] = ((t.adjacent(i, j) ? 1.0 : 0.0) + (t.adjacent(j, i) ? 1.0 : 0.0)) / total;
  }
  return p;
}

std::vector<double> burt_constraint(const Topology& t) {
  const int n = t.size();
  const auto p = tie_shares(t);
  std::vector<double> c(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int j : t.neighbors(i)) {
      double indirect = 0.0;
      for (int q : t.neighbors(i))
        if (q != j) indirect += p[i][q] * p[q][j];
      const double dyad = p[i][j] + indirect;
      c[i] += dyad * dyad;
    }
  }
  return c;
}

StructuralProfile analyze(const Topology& t) {
  const int n = t.size();
  StructuralProfile prof;
  prof.degree.resize(n);
  for (int i = 0; i < n; ++i) {
    prof.degree[i] = t.degree(i);
    if (prof.degree[i] == 0) throw TopologyError("vertex " + std::to_string(i) + " has degree 0");
  }
  prof.distance.reserve(n);
  for (int i = 0; i < n; ++i) prof.distance.push_back(bfs_distances(t, i));
  prof.betweenness = betweenness_centrality(t);
  prof.burt_constraint = burt_constraint(t);
  prof.bridging.resize(n);
  for (int i = 0; i < n; ++i) prof.bridging[i] = 1.0 - prof.burt_constraint[i];

  const double top = *std::max_element(prof.betweenness.begin(), prof.betweenness.end());
  const double tol = kBetweennessTieTolerance * std::max(1.0, std::abs(top));
  for (int i = 0; i < n; ++i)
    if (top - prof.betweenness[i] <= tol) prof.max_betweenness_set.push_back(i);
  return prof;
}

std::vector<VertexSet> nearest_neighbors(const Topology& t) {
  std::vector<VertexSet> out(t.size());
  for (int i = 0; i < t.size(); ++i) out[i] = t.neighbors(i);
  return out;
}

std::vector<VertexSet> clique_neighbors(const Topology& t) {
  std::vector<VertexSet> out(t.size());
  for (int i = 0; i < t.size(); ++i)
    for (int k : t.neighbors(i)) {
      const auto& ni = t.neighbors(i);
      bool shared = std::any_of(ni.begin(), ni.end(),
                                [&](int q) { return q != k && t.adjacent(k, q); });
      if (shared) out[i].push_back(k);
    }
  return out;
}

std::vector<VertexSet> hbn_neighbors(const Topology& t, const StructuralProfile& profile) {
  const int n = t.size();
  const auto& d = profile.distance;
  std::vector<VertexSet> out(n);
  for (int i = 0; i < n; ++i) {
    for (int m = 0; m < n; ++m) {
      if (m == i) continue;
      for (int j : profile.max_betweenness_set) {
        if (j == i) continue;
        if (d[i][j] == d[i][m] + d[m][j]) {
          out[i].push_back(m);
          break;
        }
      }
    }
  }
  return out;
}

PortfolioSet portfolios(const Topology& t, const StructuralProfile& profile) {
  return {nearest_neighbors(t), clique_neighbors(t), hbn_neighbors(t, profile)};
}

BridgingRange tctr(const StructuralProfile& profile) {
  auto [lo, hi] = std::minmax_element(profile.bridging.begin(), profile.bridging.end());
  return {*lo, *hi};
}

}  // namespace srim
