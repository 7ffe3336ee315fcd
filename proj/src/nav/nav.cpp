#include "knowpc/nav.hpp"

#include <array>
#include <queue>
#include <vector>

namespace knowpc::nav {

using sim::Coord;
using sim::EnvAction;
using sim::GridLayout;
using sim::PointClass;
using sim::WorldState;

Reachability reachability(const WorldState& state, int chef) {
  Reachability r;
  const auto& layout = *state.layout;
  const Coord from = state.chefs[static_cast<size_t>(chef)].pos;
  const auto& points = layout.points();
  for (size_t i = 0; i < points.size(); ++i) {
    const auto cls = sim::classify_point(state, static_cast<int>(i));
    if (!cls || r.contains(*cls)) continue;
    for (const auto& ap : points[i].approaches) {
      if (layout.distance(from, ap.tile) != GridLayout::kUnreachable) {
        r.insert(*cls);
        break;
      }
    }
  }
  return r;
}

bool reachable(const WorldState& state, int chef, PointClass target) {
  return nearest_target(state, chef, target).has_value();
}

std::optional<Target> nearest_target(const WorldState& state, int chef, PointClass target) {
  const auto& layout = *state.layout;
  const Coord from = state.chefs[static_cast<size_t>(chef)].pos;
  const auto& points = layout.points();
  std::optional<Target> best;
  for (size_t i = 0; i < points.size(); ++i) {
    if (sim::classify_point(state, static_cast<int>(i)) != target) continue;
    for (const auto& ap : points[i].approaches) {
      const int d = layout.distance(from, ap.tile);
      if (d == GridLayout::kUnreachable) continue;
      if (!best || d < best->distance) best = Target{static_cast<int>(i), ap, d};
    }
  }
  return best;
}

namespace {

size_t cell(const GridLayout& layout, Coord c) {
  return static_cast<size_t>(c.y * layout.width() + c.x);
}

// BFS distances to `goal` over floor tiles, treating `avoid` as walls.
std::vector<int> distances_avoiding(const GridLayout& layout, Coord goal,
                                    const std::array<Coord, 2>& avoid) {
  std::vector<int> dist(static_cast<size_t>(layout.width() * layout.height()), -1);
  auto blocked = [&](Coord c) { return c == avoid[0] || c == avoid[1]; };
  if (blocked(goal)) return dist;
  std::queue<Coord> frontier;
  dist[cell(layout, goal)] = 0;
  frontier.push(goal);
  while (!frontier.empty()) {
    const Coord c = frontier.front();
    frontier.pop();
    for (auto dir : sim::kAllDirections) {
      const Coord n = sim::neighbor(c, dir);
      if (!layout.is_floor(n) || blocked(n)) continue;
      auto& d = dist[cell(layout, n)];
      if (d >= 0) continue;
      d = dist[cell(layout, c)] + 1;
      frontier.push(n);
    }
  }
  return dist;
}

EnvAction sidestep(Rng& rng) {
  static constexpr std::array<EnvAction, 5> kSidesteps{EnvAction::Up, EnvAction::Down,
                                                       EnvAction::Left, EnvAction::Right,
                                                       EnvAction::Noop};
  return kSidesteps[static_cast<size_t>(uniform_int(rng, 0, 4))];
}

}  // namespace

EnvAction next_env_action(const WorldState& state, int chef, PointClass target, Rng& rng) {
  const auto& layout = *state.layout;
  const int faced = layout.point_at(state.facing_tile(chef));
  if (faced >= 0 && sim::classify_point(state, faced) == target) return EnvAction::Interact;

  const auto goal = nearest_target(state, chef, target);
  if (!goal) throw NavError("target class is not reachable");

  const auto& me = state.chefs[static_cast<size_t>(chef)];
  const auto& mate = state.chefs[static_cast<size_t>(1 - chef)];
  // On the facing tile: turning toward a non-floor tile never moves the chef.
  if (goal->distance == 0) return sim::move_action(goal->approach.facing);

  for (auto dir : sim::kAllDirections) {
    const Coord next = sim::neighbor(me.pos, dir);
    if (!layout.is_floor(next)) continue;
    if (layout.distance(next, goal->approach.tile) != goal->distance - 1) continue;
    const Coord mate_faces = sim::neighbor(mate.pos, mate.facing);
    // Occupied, or contested: the teammate faces the same floor tile, so both
    // may step into it and neither would move.
    if (next != mate.pos && mate_faces != next) return sim::move_action(dir);

    // If both chefs detoured they could swing round a loop in lockstep and
    // meet again, so only chef 1 goes around.
    if (chef == 0) return sidestep(rng);
    const auto dist = distances_avoiding(layout, goal->approach.tile, {mate.pos, next});
    std::optional<sim::Direction> detour;
    int detour_len = 0;
    for (auto d2 : sim::kAllDirections) {
      const Coord n = sim::neighbor(me.pos, d2);
      if (!layout.is_floor(n) || n == mate.pos || n == next) continue;
      const int dn = dist[cell(layout, n)];
      if (dn >= 0 && (!detour || dn < detour_len)) {
        detour = d2;
        detour_len = dn;
      }
    }
    if (detour) return sim::move_action(*detour);
    return sidestep(rng);
  }
  throw NavError("no shortest-path step found");  // unreachable for a consistent distance table
}

}  // namespace knowpc::nav
