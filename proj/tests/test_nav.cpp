#include <set>

#include "doctest.h"
#include "knowpc/nav.hpp"
#include "test_util.hpp"

using namespace knowpc;
using namespace knowpc::sim;
using knowpc::nav::next_env_action;

namespace {

// Moves only chef `chef`; the teammate stands still.
void apply(WorldState& s, int chef, EnvAction a) {
  if (chef == 0) {
    step_in_place(s, a, EnvAction::Noop);
  } else {
    step_in_place(s, EnvAction::Noop, a);
  }
}

}  // namespace

TEST_CASE("reachability in the open cramped room") {
  const auto s = reset(test::layout("cramped_room"));
  const auto r = nav::reachability(s, 0);
  for (auto c : {PointClass::Serving, PointClass::OnionDisp, PointClass::DishDisp,
                 PointClass::EmptyCounter, PointClass::IdlePot}) {
    CHECK(r.contains(c));
  }
  for (auto c : {PointClass::OnionCounter, PointClass::DishCounter, PointClass::SoupCounter,
                 PointClass::ReadyPot}) {
    CHECK_FALSE(r.contains(c));
  }
  CHECK(r == nav::reachability(s, 1));
}

TEST_CASE("reachability follows the split in forced coordination") {
  const auto s = reset(test::layout("forced_coordination"));
  const auto right = nav::reachability(s, 0);  // spawn 1 is on the right strip
  const auto left = nav::reachability(s, 1);
  CHECK(right.contains(PointClass::IdlePot));
  CHECK(right.contains(PointClass::Serving));
  CHECK_FALSE(right.contains(PointClass::OnionDisp));
  CHECK_FALSE(right.contains(PointClass::DishDisp));
  CHECK(left.contains(PointClass::OnionDisp));
  CHECK(left.contains(PointClass::DishDisp));
  CHECK_FALSE(left.contains(PointClass::IdlePot));
  CHECK_FALSE(left.contains(PointClass::Serving));
  // The middle counters are reachable from both sides.
  CHECK(left.contains(PointClass::EmptyCounter));
  CHECK(right.contains(PointClass::EmptyCounter));

  Rng rng(1);
  CHECK_THROWS_AS(next_env_action(s, 1, PointClass::IdlePot, rng), nav::NavError);
  CHECK_FALSE(nav::reachable(s, 1, PointClass::Serving));
}

TEST_CASE("nearest target picks the closest approach tile") {
  const auto g = test::layout("cramped_room");
  auto s = reset(g);
  // Chef 1 at (3,1) is next to the right onion dispenser.
  const auto t = nav::nearest_target(s, 1, PointClass::OnionDisp);
  REQUIRE(t);
  CHECK(g->points()[static_cast<size_t>(t->point)].pos == Coord{4, 1});
  CHECK(t->distance == 0);
  // Chef 0 at (1,2) is one step from the left one.
  const auto t0 = nav::nearest_target(s, 0, PointClass::OnionDisp);
  REQUIRE(t0);
  CHECK(g->points()[static_cast<size_t>(t0->point)].pos == Coord{0, 1});
  CHECK(t0->distance == 1);
  CHECK_FALSE(nav::nearest_target(s, 0, PointClass::ReadyPot).has_value());
}

TEST_CASE("nearest target ties go to the first point in row-major order") {
  // Two onion dispensers at equal distance from (3,1).
  const auto g = test::inline_layout("XXXPXXX\nO     O\nX1 2  X\nXXDXSXX\n");
  auto s = reset(g);
  s.chefs[1].pos = {3, 1};
  const auto t = nav::nearest_target(s, 1, PointClass::OnionDisp);
  REQUIRE(t);
  CHECK(t->distance == 2);
  CHECK(g->points()[static_cast<size_t>(t->point)].pos == Coord{0, 1});
}

TEST_CASE("controller interacts when facing, turns on the approach tile") {
  auto s = reset(test::layout("cramped_room"));
  Rng rng(3);
  // Chef 1 at (3,1) faces up at a counter; the onion dispenser is to its right.
  CHECK(next_env_action(s, 1, PointClass::OnionDisp, rng) == EnvAction::Right);
  apply(s, 1, EnvAction::Right);
  CHECK(s.chefs[1].pos == Coord{3, 1});
  CHECK(next_env_action(s, 1, PointClass::OnionDisp, rng) == EnvAction::Interact);
}

TEST_CASE("controller reaches the target within distance plus turning overhead") {
  const auto g = test::layout("counter_circuit");
  for (auto target : {PointClass::Serving, PointClass::OnionDisp, PointClass::DishDisp,
                      PointClass::IdlePot}) {
    auto s = reset(g);
    s.chefs[1] = {{1, 1}, Direction::Up, Item::None};  // off every route used here
    Rng rng(7);
    const auto goal = nav::nearest_target(s, 0, target);
    REQUIRE(goal);
    int steps = 0;
    int last = goal->distance;
    while (next_env_action(s, 0, target, rng) != EnvAction::Interact) {
      const auto a = next_env_action(s, 0, target, rng);
      apply(s, 0, a);
      const auto now = nav::nearest_target(s, 0, target);
      REQUIRE(now);
      if (movement_direction(a) && last > 0) CHECK(now->distance < last);
      last = now->distance;
      REQUIRE(++steps <= goal->distance + 4);
    }
  }
}

TEST_CASE("chef 0 sidesteps randomly when the teammate blocks the path") {
  const auto g = test::layout("counter_circuit");
  auto s = reset(g);
  // Corridor row 1: chef 0 at (2,1) heads for the dish dispenser via (1,1),
  // where chef 1 stands.
  s.chefs[0] = {{2, 1}, Direction::Left, Item::None};
  s.chefs[1] = {{1, 1}, Direction::Up, Item::None};
  std::set<EnvAction> seen;
  for (int seed = 0; seed < 200; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    seen.insert(next_env_action(s, 0, PointClass::DishDisp, rng));
  }
  CHECK(seen == std::set<EnvAction>{EnvAction::Up, EnvAction::Down, EnvAction::Left,
                                    EnvAction::Right, EnvAction::Noop});
}

TEST_CASE("contested floor tile also counts as blocked") {
  const auto g = test::layout("counter_circuit");
  auto s = reset(g);
  // Both chefs next to (3,1); chef 1 faces it.
  s.chefs[0] = {{2, 1}, Direction::Right, Item::None};
  s.chefs[1] = {{4, 1}, Direction::Left, Item::None};
  std::set<EnvAction> seen;
  for (int seed = 0; seed < 100; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed));
    seen.insert(next_env_action(s, 0, PointClass::Serving, rng));
  }
  CHECK(seen.size() > 1);
  CHECK_FALSE(seen.contains(EnvAction::Interact));
}

TEST_CASE("chef 1 detours around a blocking teammate on a loop") {
  const auto g = test::layout("counter_circuit");
  auto s = reset(g);
  // Chef 1 at (2,1) wants the dish dispenser at (0,2) through (1,1), which
  // chef 0 occupies. The loop via row 3 is open.
  s.chefs[1] = {{2, 1}, Direction::Left, Item::None};
  s.chefs[0] = {{1, 1}, Direction::Right, Item::None};
  Rng rng(5);
  CHECK(next_env_action(s, 1, PointClass::DishDisp, rng) == EnvAction::Right);
  for (int seed = 0; seed < 20; ++seed) {
    Rng r(static_cast<std::uint64_t>(seed));
    CHECK(next_env_action(s, 1, PointClass::DishDisp, r) == EnvAction::Right);
  }
}

TEST_CASE("chef 1 falls back to a sidestep without a detour") {
  // Dead-end corridor: the onion dispenser is only reachable through chef 0.
  const auto corridor = test::inline_layout("XXXXXX\nO1 2 P\nXXDXSX\n");
  auto c = reset(corridor);
  c.chefs[0] = {{2, 1}, Direction::Right, Item::None};
  c.chefs[1] = {{3, 1}, Direction::Left, Item::None};
  std::set<EnvAction> seen;
  for (int seed = 0; seed < 200; ++seed) {
    Rng r(static_cast<std::uint64_t>(seed));
    seen.insert(next_env_action(c, 1, PointClass::OnionDisp, r));
  }
  CHECK(seen.size() == 5);
  CHECK_FALSE(seen.contains(EnvAction::Interact));
}
