#include "srim/gridmap.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

namespace srim {

namespace {

// Mirrors the files under maps/.
const std::map<std::string, std::string, std::less<>>& builtin_maps() {
  static const std::map<std::string, std::string, std::less<>> maps{
    {"harvest-small", R"(##################
#S......A.......S#
#......AAA.......#
#.....AAAAA..A...#
#S.....AAA..AAA.S#
#...A...A..AAAAA.#
#..AAA......AAA..#
#S..A........A...#
##################
)"},
    {"cleanup-small", R"(##################
#WWW..S.....AAAAA#
#WWW.........AAAA#
#WWW..S.....AAAAA#
#WWW.........AAAA#
#WWW..S.....AAAAA#
#WWW.........AAAA#
#WWW..S...S.AAAAA#
##################
)"},
    {"micro-harvest", R"(##########
#S..AA..S#
#..AAAA..#
#S..AA..S#
#...S....#
##########
)"},
  };
  return maps;
}

}  // namespace

GridMap GridMap::parse(std::string_view text) {
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("map is empty");
  GridMap m;
  m.height_ = static_cast<int>(rows.size());
  m.width_ = static_cast<int>(rows.front().size());
  m.cells_.assign(static_cast<std::size_t>(m.width_) * m.height_, Cell::Wall);
  m.spawn_index_.assign(m.cells_.size(), -1);
  m.aquifer_index_.assign(m.cells_.size(), -1);
  for (int y = 0; y < m.height_; ++y) {
    if (static_cast<int>(rows[y].size()) != m.width_)
      throw std::invalid_argument("map row " + std::to_string(y) + " has width " +
                                  std::to_string(rows[y].size()) + ", expected " +
                                  std::to_string(m.width_));
    for (int x = 0; x < m.width_; ++x) {
      const Pos p{x, y};
      Cell c;
      switch (rows[y][x]) {
        case '#': c = Cell::Wall; break;
        case '.': c = Cell::Empty; break;
        case 'S':
          c = Cell::Empty;
          m.starts_.push_back(p);
          break;
        case 'A':
          c = Cell::AppleSpawn;
          m.spawn_index_[m.index(p)] = static_cast<int>(m.spawns_.size());
          m.spawns_.push_back(p);
          break;
        case 'W':
          c = Cell::Aquifer;
          m.aquifer_index_[m.index(p)] = static_cast<int>(m.aquifer_.size());
          m.aquifer_.push_back(p);
          break;
        default:
          throw std::invalid_argument(std::string("unknown map symbol '") + rows[y][x] + "'");
      }
      m.cells_[m.index(p)] = c;
    }
  }
  if (m.starts_.empty()) throw std::invalid_argument("map has no agent start cells");
  return m;
}

GridMap GridMap::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open map file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string GridMap::to_text() const {
  std::string out;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Pos p{x, y};
      char ch = '#';
      switch (cells_[index(p)]) {
        case Cell::Wall: ch = '#'; break;
        case Cell::Empty: ch = '.'; break;
        case Cell::AppleSpawn: ch = 'A'; break;
        case Cell::Aquifer: ch = 'W'; break;
      }
      if (std::find(starts_.begin(), starts_.end(), p) != starts_.end()) ch = 'S';
      out += ch;
    }
    out += '\n';
  }
  return out;
}

std::vector<std::string> builtin_map_names() {
  std::vector<std::string> names;
  for (const auto& [k, v] : builtin_maps()) names.push_back(k);
  return names;
}

std::string_view builtin_map_text(std::string_view name) {
  const auto& maps = builtin_maps();
  auto it = maps.find(name);
  if (it == maps.end()) throw std::invalid_argument("unknown map '" + std::string(name) + "'");
  return it->second;
}

GridMap scale_map(const GridMap& base, int n_agents) {
  const int per_copy = static_cast<int>(base.starts().size());
  const int copies = std::max(1, (n_agents + per_copy - 1) / per_copy);
  if (copies == 1) return base;
  std::istringstream in(base.to_text());
  std::vector<std::string> rows;
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  // Interior border columns are dropped so the copies form one open field.
  const std::size_t w = rows.front().size();
  std::vector<std::string> tiled(rows.size());
  for (std::size_t y = 0; y < rows.size(); ++y) {
    tiled[y] = rows[y].substr(0, w - 1);
    for (int c = 1; c < copies - 1; ++c) tiled[y] += rows[y].substr(1, w - 2);
    tiled[y] += rows[y].substr(1);
  }
  std::string text;
  for (const auto& r : tiled) text += r + "\n";
  return GridMap::parse(text);
}

}  // namespace srim
