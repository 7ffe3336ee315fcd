#include <sstream>

#include "knowpc/sim.hpp"

namespace knowpc::sim {

Coord neighbor(Coord c, Direction d) {
  switch (d) {
    case Direction::Up: return {c.x, c.y - 1};
    case Direction::Down: return {c.x, c.y + 1};
    case Direction::Left: return {c.x - 1, c.y};
    case Direction::Right: return {c.x + 1, c.y};
  }
  return c;
}

std::optional<Direction> movement_direction(EnvAction a) {
  switch (a) {
    case EnvAction::Up: return Direction::Up;
    case EnvAction::Down: return Direction::Down;
    case EnvAction::Left: return Direction::Left;
    case EnvAction::Right: return Direction::Right;
    default: return std::nullopt;
  }
}

EnvAction move_action(Direction d) {
  switch (d) {
    case Direction::Up: return EnvAction::Up;
    case Direction::Down: return EnvAction::Down;
    case Direction::Left: return EnvAction::Left;
    case Direction::Right: return EnvAction::Right;
  }
  return EnvAction::Noop;
}

std::string_view to_string(EnvAction a) {
  switch (a) {
    case EnvAction::Up: return "up";
    case EnvAction::Down: return "down";
    case EnvAction::Left: return "left";
    case EnvAction::Right: return "right";
    case EnvAction::Noop: return "noop";
    case EnvAction::Interact: return "interact";
  }
  return "?";
}

std::string_view to_string(Item item) {
  switch (item) {
    case Item::None: return "empty";
    case Item::Onion: return "onion";
    case Item::Dish: return "dish";
    case Item::Soup: return "soup";
  }
  return "?";
}

std::string_view to_string(Direction d) {
  switch (d) {
    case Direction::Up: return "up";
    case Direction::Down: return "down";
    case Direction::Left: return "left";
    case Direction::Right: return "right";
  }
  return "?";
}

std::optional<EnvAction> parse_env_action(std::string_view s) {
  for (EnvAction a : kAllEnvActions) {
    if (to_string(a) == s) return a;
  }
  return std::nullopt;
}

std::string_view to_string(PointType t) {
  switch (t) {
    case PointType::OnionDispenser: return "onionDisp";
    case PointType::DishDispenser: return "dishDisp";
    case PointType::Counter: return "counter";
    case PointType::Pot: return "pot";
    case PointType::Serving: return "serving";
  }
  return "?";
}

std::string_view to_string(RelPos p) {
  switch (p) {
    case RelPos::On: return "on";
    case RelPos::Face: return "face";
    case RelPos::Away: return "away";
  }
  return "?";
}

std::string WorldState::serialize() const {
  std::ostringstream out;
  out << (layout ? layout->name() : std::string("?")) << " t=" << t << "/" << horizon;
  for (const auto& c : chefs) {
    out << " chef(" << c.pos.x << "," << c.pos.y << "," << to_string(c.facing) << ","
        << to_string(c.held) << ")";
  }
  for (const auto& p : pots) out << " pot(" << p.onions << "," << p.cook_time << ")";
  out << " counters:";
  for (Item i : counters) out << static_cast<int>(i);
  return out.str();
}

WorldState reset(std::shared_ptr<const GridLayout> layout, int horizon) {
  WorldState s;
  for (size_t i = 0; i < 2; ++i) {
    s.chefs[i] = ChefState{layout->spawns()[i].pos, layout->spawns()[i].facing, Item::None};
  }
  s.pots.assign(static_cast<size_t>(layout->num_pots()), PotState{});
  s.counters.assign(static_cast<size_t>(layout->num_counters()), Item::None);
  s.t = 0;
  s.horizon = horizon;
  s.layout = std::move(layout);
  return s;
}

namespace {

int interact(WorldState& s, int chef) {
  auto& c = s.chefs[static_cast<size_t>(chef)];
  const int idx = s.layout->point_at(s.facing_tile(chef));
  if (idx < 0) return 0;
  const auto& point = s.layout->points()[static_cast<size_t>(idx)];
  switch (point.kind) {
    case Tile::OnionDispenser:
      if (c.held == Item::None) c.held = Item::Onion;
      return 0;
    case Tile::DishDispenser:
      if (c.held == Item::None) c.held = Item::Dish;
      return 0;
    case Tile::Pot: {
      auto& pot = s.pots[static_cast<size_t>(point.slot)];
      if (c.held == Item::Onion && pot.accepts_onion()) {
        ++pot.onions;
        c.held = Item::None;
      } else if (c.held == Item::Dish && pot.ready()) {
        pot = PotState{};
        c.held = Item::Soup;
      }
      return 0;
    }
    case Tile::Serving:
      if (c.held == Item::Soup) {
        c.held = Item::None;
        return kDeliveryReward;
      }
      return 0;
    case Tile::Counter: {
      auto& content = s.counters[static_cast<size_t>(point.slot)];
      if (content == Item::None && c.held != Item::None) {
        content = c.held;
        c.held = Item::None;
      } else if (content != Item::None && c.held == Item::None) {
        c.held = content;
        content = Item::None;
      }
      return 0;
    }
    case Tile::Floor: return 0;
  }
  return 0;
}

}  // namespace

int step_in_place(WorldState& s, EnvAction a1, EnvAction a2) {
  if (s.terminal()) throw SimError("step on a terminated episode (t = horizon)");
  const std::array<EnvAction, 2> actions{a1, a2};

  // Movement: turn, then advance unless blocked or in conflict.
  std::array<Coord, 2> dest{s.chefs[0].pos, s.chefs[1].pos};
  for (size_t i = 0; i < 2; ++i) {
    if (const auto dir = movement_direction(actions[i])) {
      s.chefs[i].facing = *dir;
      const Coord target = neighbor(s.chefs[i].pos, *dir);
      if (s.layout->is_floor(target)) dest[i] = target;
    }
  }
  const bool same_target = dest[0] == dest[1];
  const bool swap = dest[0] == s.chefs[1].pos && dest[1] == s.chefs[0].pos;
  if (!same_target && !swap) {
    s.chefs[0].pos = dest[0];
    s.chefs[1].pos = dest[1];
  }

  // Interactions, chef 0 first.
  int reward = 0;
  for (int i = 0; i < 2; ++i) {
    if (actions[static_cast<size_t>(i)] == EnvAction::Interact) reward += interact(s, i);
  }

  // Cooking.
  for (auto& pot : s.pots) {
    if (pot.cooking()) ++pot.cook_time;
  }
  ++s.t;
  return reward;
}

StepOutcome step(const WorldState& state, EnvAction a1, EnvAction a2) {
  StepOutcome out{state, 0};
  out.reward = step_in_place(out.state, a1, a2);
  return out;
}

std::optional<PointClass> classify_point(const WorldState& s, int point) {
  const auto& p = s.layout->points()[static_cast<size_t>(point)];
  switch (p.kind) {
    case Tile::Serving: return PointClass::Serving;
    case Tile::OnionDispenser: return PointClass::OnionDisp;
    case Tile::DishDispenser: return PointClass::DishDisp;
    case Tile::Counter:
      switch (s.counters[static_cast<size_t>(p.slot)]) {
        case Item::None: return PointClass::EmptyCounter;
        case Item::Onion: return PointClass::OnionCounter;
        case Item::Dish: return PointClass::DishCounter;
        case Item::Soup: return PointClass::SoupCounter;
      }
      break;
    case Tile::Pot: {
      const auto& pot = s.pots[static_cast<size_t>(p.slot)];
      if (pot.ready()) return PointClass::ReadyPot;
      if (pot.accepts_onion()) return PointClass::IdlePot;
      return std::nullopt;
    }
    case Tile::Floor: break;
  }
  return std::nullopt;
}

bool is_stateless(PointType t) {
  return t == PointType::OnionDispenser || t == PointType::DishDispenser ||
         t == PointType::Serving;
}

RelPos relative_position(const WorldState& s, int chef, Coord point) {
  if (s.chefs[static_cast<size_t>(chef)].pos == point) return RelPos::On;
  if (s.facing_tile(chef) == point) return RelPos::Face;
  return RelPos::Away;
}

std::vector<ElementView> observe_elements(const WorldState& s, int chef) {
  const auto& points = s.layout->points();
  std::vector<ElementView> views;
  views.reserve(points.size() + 1);
  ElementView player;
  player.id = 0;
  player.is_player = true;
  player.item = s.chefs[static_cast<size_t>(chef)].held;
  views.push_back(player);
  for (size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    ElementView v;
    v.id = static_cast<int>(i) + 1;
    switch (p.kind) {
      case Tile::OnionDispenser: v.type = PointType::OnionDispenser; break;
      case Tile::DishDispenser: v.type = PointType::DishDispenser; break;
      case Tile::Serving: v.type = PointType::Serving; break;
      case Tile::Pot:
        v.type = PointType::Pot;
        v.pot = s.pots[static_cast<size_t>(p.slot)];
        break;
      case Tile::Counter:
        v.type = PointType::Counter;
        v.item = s.counters[static_cast<size_t>(p.slot)];
        break;
      case Tile::Floor: break;
    }
    v.pos = relative_position(s, chef, p.pos);
    views.push_back(v);
  }
  return views;
}

int count_soups(const WorldState& s) {
  int n = 0;
  for (const auto& c : s.chefs) n += c.held == Item::Soup ? 1 : 0;
  for (Item i : s.counters) n += i == Item::Soup ? 1 : 0;
  for (const auto& p : s.pots) n += p.ready() ? 1 : 0;
  return n;
}

}  // namespace knowpc::sim
