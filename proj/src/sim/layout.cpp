#include <algorithm>
#include <deque>
#include <fstream>
#include <sstream>

#include "knowpc/sim.hpp"

namespace knowpc::sim {
namespace {

std::vector<std::string> split_rows(std::string_view text) {
  std::vector<std::string> rows;
  std::string row;
  for (char ch : text) {
    if (ch == '\r') continue;
    if (ch == '\n') {
      rows.push_back(std::move(row));
      row.clear();
    } else {
      row.push_back(ch);
    }
  }
  if (!row.empty()) rows.push_back(std::move(row));
  while (!rows.empty() && rows.back().empty()) rows.pop_back();
  return rows;
}

std::optional<Tile> tile_for(char ch) {
  switch (ch) {
    case ' ':
    case '1':
    case '2': return Tile::Floor;
    case 'X': return Tile::Counter;
    case 'O': return Tile::OnionDispenser;
    case 'D': return Tile::DishDispenser;
    case 'P': return Tile::Pot;
    case 'S': return Tile::Serving;
    default: return std::nullopt;
  }
}

char char_for(Tile t) {
  switch (t) {
    case Tile::Floor: return ' ';
    case Tile::Counter: return 'X';
    case Tile::OnionDispenser: return 'O';
    case Tile::DishDispenser: return 'D';
    case Tile::Pot: return 'P';
    case Tile::Serving: return 'S';
  }
  return '?';
}

}  // namespace

GridLayout GridLayout::parse(std::string_view text, std::string name) {
  const auto rows = split_rows(text);
  if (rows.empty()) throw LayoutError("layout '" + name + "': empty grid");
  GridLayout layout;
  layout.name_ = std::move(name);
  layout.height_ = static_cast<int>(rows.size());
  layout.width_ = static_cast<int>(rows.front().size());
  if (layout.width_ == 0) throw LayoutError("layout '" + layout.name_ + "': empty row");
  layout.tiles_.reserve(static_cast<size_t>(layout.width_ * layout.height_));

  std::array<std::vector<Coord>, 2> spawn_marks;
  for (int y = 0; y < layout.height_; ++y) {
    const auto& row = rows[static_cast<size_t>(y)];
    if (static_cast<int>(row.size()) != layout.width_) {
      throw LayoutError("layout '" + layout.name_ + "': grid is not rectangular (row " +
                        std::to_string(y) + ")");
    }
    for (int x = 0; x < layout.width_; ++x) {
      const char ch = row[static_cast<size_t>(x)];
      const auto t = tile_for(ch);
      if (!t) {
        throw LayoutError("layout '" + layout.name_ + "': unknown character '" +
                          std::string(1, ch) + "' at (" + std::to_string(x) + "," +
                          std::to_string(y) + ")");
      }
      layout.tiles_.push_back(*t);
      if (ch == '1' || ch == '2') spawn_marks[static_cast<size_t>(ch - '1')].push_back({x, y});
    }
  }

  const size_t total_spawns = spawn_marks[0].size() + spawn_marks[1].size();
  if (total_spawns != 2) {
    throw LayoutError("layout '" + layout.name_ + "': spawn count must be 2, found " +
                      std::to_string(total_spawns));
  }
  if (spawn_marks[0].size() != 1) {
    throw LayoutError("layout '" + layout.name_ + "': duplicate spawn index");
  }
  layout.spawns_[0] = Spawn{spawn_marks[0][0], Direction::Up};
  layout.spawns_[1] = Spawn{spawn_marks[1][0], Direction::Up};

  if (layout.count(Tile::Pot) == 0) throw LayoutError("layout '" + layout.name_ + "': no pot");
  if (layout.count(Tile::OnionDispenser) == 0) {
    throw LayoutError("layout '" + layout.name_ + "': no onion dispenser");
  }
  if (layout.count(Tile::DishDispenser) == 0) {
    throw LayoutError("layout '" + layout.name_ + "': no dish dispenser");
  }
  if (layout.count(Tile::Serving) == 0) {
    throw LayoutError("layout '" + layout.name_ + "': no serving station");
  }

  layout.point_index_.assign(layout.tiles_.size(), -1);
  for (int y = 0; y < layout.height_; ++y) {
    for (int x = 0; x < layout.width_; ++x) {
      const Coord c{x, y};
      const Tile t = layout.tile(c);
      if (t == Tile::Floor) continue;
      InteractionPoint p{c, t, -1, {}};
      if (t == Tile::Pot) p.slot = layout.num_pots_++;
      if (t == Tile::Counter) p.slot = layout.num_counters_++;
      for (Direction d : kAllDirections) {
        const Coord from = neighbor(c, d);
        if (!layout.is_floor(from)) continue;
        // The chef stands on `from` and looks back at the point.
        Direction back = Direction::Up;
        switch (d) {
          case Direction::Up: back = Direction::Down; break;
          case Direction::Down: back = Direction::Up; break;
          case Direction::Left: back = Direction::Right; break;
          case Direction::Right: back = Direction::Left; break;
        }
        p.approaches.push_back({from, back});
      }
      layout.point_index_[static_cast<size_t>(layout.index(c))] =
          static_cast<int>(layout.points_.size());
      layout.points_.push_back(std::move(p));
    }
  }

  layout.compute_distances();

  // Every floor tile must be reachable from one of the spawns.
  for (int y = 0; y < layout.height_; ++y) {
    for (int x = 0; x < layout.width_; ++x) {
      const Coord c{x, y};
      if (!layout.is_floor(c)) continue;
      if (layout.distance(layout.spawns_[0].pos, c) == kUnreachable &&
          layout.distance(layout.spawns_[1].pos, c) == kUnreachable) {
        throw LayoutError("layout '" + layout.name_ + "': floor tile (" + std::to_string(x) +
                          "," + std::to_string(y) + ") is unreachable from both spawns");
      }
    }
  }
  return layout;
}

GridLayout GridLayout::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw LayoutError("cannot open layout file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.stem().string());
}

int GridLayout::count(Tile kind) const {
  return static_cast<int>(std::count(tiles_.begin(), tiles_.end(), kind));
}

void GridLayout::compute_distances() {
  floor_index_.assign(tiles_.size(), -1);
  num_floor_ = 0;
  for (size_t i = 0; i < tiles_.size(); ++i) {
    if (tiles_[i] == Tile::Floor) floor_index_[i] = num_floor_++;
  }
  const auto n = static_cast<size_t>(num_floor_);
  dist_.assign(n * n, kUnreachable);
  std::deque<Coord> queue;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Coord src{x, y};
      if (!is_floor(src)) continue;
      const auto row = static_cast<size_t>(floor_index_[static_cast<size_t>(index(src))]) * n;
      dist_[row + static_cast<size_t>(floor_index_[static_cast<size_t>(index(src))])] = 0;
      queue.assign(1, src);
      while (!queue.empty()) {
        const Coord cur = queue.front();
        queue.pop_front();
        const int d = dist_[row + static_cast<size_t>(floor_index_[static_cast<size_t>(index(cur))])];
        for (Direction dir : kAllDirections) {
          const Coord next = neighbor(cur, dir);
          if (!is_floor(next)) continue;
          auto& slot = dist_[row + static_cast<size_t>(floor_index_[static_cast<size_t>(index(next))])];
          if (slot != kUnreachable) continue;
          slot = d + 1;
          queue.push_back(next);
        }
      }
    }
  }
}

int GridLayout::distance(Coord from, Coord to) const {
  if (!is_floor(from) || !is_floor(to)) return kUnreachable;
  const auto a = static_cast<size_t>(floor_index_[static_cast<size_t>(index(from))]);
  const auto b = static_cast<size_t>(floor_index_[static_cast<size_t>(index(to))]);
  return dist_[a * static_cast<size_t>(num_floor_) + b];
}

std::string GridLayout::render() const {
  std::string out;
  out.reserve(static_cast<size_t>((width_ + 1) * height_));
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      const Coord c{x, y};
      if (c == spawns_[0].pos) {
        out.push_back('1');
      } else if (c == spawns_[1].pos) {
        out.push_back('2');
      } else {
        out.push_back(char_for(tile(c)));
      }
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace knowpc::sim
