#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace srim {

struct Pos {
  int x = 0;
  int y = 0;
  bool operator==(const Pos&) const = default;
};

enum class Cell : unsigned char { Wall, Empty, AppleSpawn, Aquifer };

// Static layout of a gridworld. Legend: '#' wall, '.' empty, 'A' apple
// spawn point, 'W' aquifer cell, 'S' agent start (an empty cell).
class GridMap {
 public:
  static GridMap parse(std::string_view text);
  static GridMap load(const std::filesystem::path& path);

  int width() const { return width_; }
  int height() const { return height_; }
  bool inside(Pos p) const { return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_; }
  int index(Pos p) const { return p.y * width_ + p.x; }
  Cell at(Pos p) const { return inside(p) ? cells_[index(p)] : Cell::Wall; }
  bool walkable(Pos p) const { return at(p) != Cell::Wall; }

  const std::vector<Pos>& starts() const { return starts_; }
  const std::vector<Pos>& spawn_points() const { return spawns_; }
  const std::vector<Pos>& aquifer() const { return aquifer_; }
  // Index into spawn_points()/aquifer() for a cell, or -1.
  int spawn_index(Pos p) const { return inside(p) ? spawn_index_[index(p)] : -1; }
  int aquifer_index(Pos p) const { return inside(p) ? aquifer_index_[index(p)] : -1; }

  std::string to_text() const;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<Cell> cells_;
  std::vector<Pos> starts_;
  std::vector<Pos> spawns_;
  std::vector<Pos> aquifer_;
  std::vector<int> spawn_index_;
  std::vector<int> aquifer_index_;
};

/// Names of maps compiled into the library.
std::vector<std::string> builtin_map_names();
/// Text of a built-in map; throws std::invalid_argument for unknown names.
std::string_view builtin_map_text(std::string_view name);

/// Tiles `base` side by side so that the result has at least `n_agents`
/// start cells while keeping spawn points per start constant.
GridMap scale_map(const GridMap& base, int n_agents);

}  // namespace srim
