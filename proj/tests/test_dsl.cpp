#include <queue>
#include <set>

#include "doctest.h"
#include "knowpc/dsl.hpp"
#include "test_util.hpp"

using namespace knowpc;
using namespace knowpc::dsl;
using sim::Item;
using sim::PointClass;

namespace {

Program listing1() { return load_program(test::source_path("fixtures/listing1.ktp")); }

Literal lit(Condition c, bool negated = false) { return {c, negated}; }

ConditionContext ctx(Item held, std::initializer_list<PointClass> reach) {
  ConditionContext c;
  c.held = held;
  for (auto r : reach) c.reach.insert(r);
  return c;
}

int error_line(std::string_view text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.line();
  }
  return 0;
}

std::string error_text(std::string_view text) {
  try {
    parse_program(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return {};
}

// Plain flood fill over floor tiles; true if some tile next to `target` is
// reached.
bool flood_reaches(const sim::GridLayout& g, sim::Coord from, sim::Coord target) {
  std::set<sim::Coord> seen{from};
  std::queue<sim::Coord> q;
  q.push(from);
  while (!q.empty()) {
    const auto c = q.front();
    q.pop();
    if (std::abs(c.x - target.x) + std::abs(c.y - target.y) == 1) return true;
    for (auto d : sim::kAllDirections) {
      const auto n = sim::neighbor(c, d);
      if (g.is_floor(n) && seen.insert(n).second) q.push(n);
    }
  }
  return false;
}

}  // namespace

TEST_CASE("name tables cover every primitive") {
  for (auto c : all_conditions()) CHECK(parse_condition(to_string(c)) == c);
  for (auto a : all_action_primitives()) {
    CHECK(parse_action_primitive(to_string(a)) == a);
    CHECK(action_for(target_class(a)) == a);
  }
  CHECK_FALSE(parse_condition("HoldPlate").has_value());
  CHECK(exists_condition(PointClass::ReadyPot) == Condition::ExReadyPot);
  CHECK(hold_condition(Item::Soup) == Condition::HoldSoup);
  CHECK(is_hold(Condition::HoldSoup));
  CHECK_FALSE(is_hold(Condition::ExServing));
}

TEST_CASE("the reference program parses into eight modules") {
  const auto p = listing1();
  REQUIRE(p.size() == 8);
  CHECK(p.complexity() == 22);
  CHECK(p.modules()[0].action == ActionPrimitive::GoIntIdlePot);
  CHECK(p.modules()[0].conditions ==
        std::vector<Literal>{lit(Condition::ExIdlePot), lit(Condition::HoldOnion)});
  CHECK(p.modules()[3].conditions ==
        std::vector<Literal>{lit(Condition::ExOnionDisp), lit(Condition::ExIdlePot),
                             lit(Condition::ExReadyPot, true), lit(Condition::HoldEmpty)});
  // The redundant `not HoldEmpty and HoldDish` is kept.
  CHECK(p.modules()[4].conditions.size() == 3);
  CHECK(p.modules()[7].action == ActionPrimitive::GoIntServing);
}

TEST_CASE("render and parse round trip") {
  const auto p = listing1();
  const auto text = render_program(p);
  CHECK(parse_program(text) == p);
  CHECK(render_program(parse_program(text)) == text);

  // Same text modulo comments and whitespace.
  auto strip = [](std::string s) {
    std::string out;
    bool comment = false;
    for (char ch : s) {
      if (ch == '#') comment = true;
      if (ch == '\n') comment = false;
      if (!comment && ch != ' ' && ch != '\t' && ch != '\n') out += ch;
    }
    return out;
  };
  CHECK(strip(text) == strip(test::read_file(test::source_path("fixtures/listing1.ktp"))));

  CHECK(render_program(Program{}) == "RandomAct\n");
  CHECK(parse_program("RandomAct\n").empty());
  CHECK(parse_program("").empty());
}

TEST_CASE("action may share the if line") {
  const auto p = parse_program("if HoldSoup and ExServing: GoIntServing\nRandomAct\n");
  REQUIRE(p.size() == 1);
  CHECK(p.modules()[0].action == ActionPrimitive::GoIntServing);
  CHECK(p.modules()[0].conditions.size() == 2);
}

TEST_CASE("parse errors carry the offending line") {
  CHECK(error_line("if HoldOnion and not HoldOnion:\n\tGoIntIdlePot\n") == 1);
  CHECK(error_text("if HoldOnion and not HoldOnion: GoIntIdlePot").find("contradictory") !=
        std::string::npos);
  CHECK(error_text("if HoldOnion and HoldDish: GoIntIdlePot").find("mutually exclusive") !=
        std::string::npos);
  CHECK(error_text("if HoldOnion and HoldOnion: GoIntIdlePot").find("duplicate") !=
        std::string::npos);

  CHECK(error_line("if HoldSoup: GoIntServing\nif :\n\tGoIntServing\n") == 2);
  CHECK(error_text("if :\n\tGoIntServing\n").find("empty conjunction") != std::string::npos);

  CHECK(error_line("if HoldSoup:\n\tif ExServing: GoIntServing\n") == 2);
  CHECK(error_text("if HoldSoup and if ExServing: GoIntServing").find("nested if") !=
        std::string::npos);

  CHECK(error_line("\n\nif HoldPlate: GoIntServing\n") == 3);
  CHECK(error_text("if HoldSoup: GoIntSink").find("unknown primitive 'GoIntSink'") !=
        std::string::npos);

  CHECK(error_text("if HoldSoup and: GoIntServing").find("dangling 'and'") != std::string::npos);
  CHECK(error_text("if HoldSoup or ExServing: GoIntServing").find("expected 'and'") !=
        std::string::npos);
  CHECK(error_text("if HoldSoup and not: GoIntServing").find("expected condition") !=
        std::string::npos);
  CHECK(error_line("if HoldSoup GoIntServing\n") == 1);
  CHECK(error_text("if HoldSoup GoIntServing").find("missing ':'") != std::string::npos);
  CHECK(error_text("if HoldSoup: GoIntServing GoIntDishDisp").find("single action") !=
        std::string::npos);

  CHECK(error_line("RandomAct\nif HoldSoup: GoIntServing\n") == 2);
  CHECK(error_text("RandomAct\nRandomAct").find("after RandomAct") != std::string::npos);
  CHECK(error_line("if HoldSoup:\n") == 2);
  CHECK(error_line("GoIntServing\n") == 1);
  // A comment after RandomAct is fine.
  CHECK(error_line("RandomAct\n# trailing note\n") == 0);
}

TEST_CASE("consistency of conjunctions") {
  using C = Condition;
  CHECK(consistent(std::vector<Literal>{lit(C::HoldEmpty), lit(C::ExServing)}));
  CHECK(consistent(std::vector<Literal>{lit(C::HoldDish), lit(C::HoldEmpty, true)}));
  CHECK_FALSE(consistent(std::vector<Literal>{lit(C::HoldDish), lit(C::HoldSoup)}));
  CHECK_FALSE(consistent(std::vector<Literal>{lit(C::ExServing), lit(C::ExServing, true)}));
  CHECK_FALSE(consistent(std::vector<Literal>{lit(C::HoldEmpty, true), lit(C::HoldOnion, true),
                                              lit(C::HoldDish, true), lit(C::HoldSoup, true)}));
  CHECK(consistent(std::vector<Literal>{lit(C::HoldEmpty, true), lit(C::HoldOnion, true),
                                        lit(C::HoldDish, true)}));
  const std::vector<Literal> base{lit(C::HoldOnion)};
  CHECK(compatible(base, lit(C::ExIdlePot)));
  CHECK(compatible(base, lit(C::HoldEmpty, true)));
  CHECK_FALSE(compatible(base, lit(C::HoldEmpty)));
  CHECK_FALSE(compatible(base, lit(C::HoldOnion, true)));
}

TEST_CASE("condition evaluation") {
  const auto c = ctx(Item::Onion, {PointClass::IdlePot});
  CHECK(eval_condition(lit(Condition::HoldOnion), c));
  CHECK_FALSE(eval_condition(lit(Condition::HoldEmpty), c));
  CHECK(eval_condition(lit(Condition::HoldEmpty, true), c));
  CHECK(eval_condition(lit(Condition::ExIdlePot), c));
  CHECK_FALSE(eval_condition(lit(Condition::ExReadyPot), c));
  CHECK(eval_condition(lit(Condition::ExReadyPot, true), c));
}

TEST_CASE("ready pot in the world sets ExReadyPot") {
  const auto g = test::layout("cramped_room");
  auto s = sim::reset(g);
  s.pots[0] = {3, sim::kCookTicks};
  const auto c = make_context(s, 0);
  CHECK(eval_condition(lit(Condition::ExReadyPot), c));
  CHECK_FALSE(eval_condition(lit(Condition::ExIdlePot), c));
  // Cooking pots are neither idle nor ready.
  s.pots[0] = {3, 7};
  const auto cooking = make_context(s, 0);
  CHECK_FALSE(eval_condition(lit(Condition::ExReadyPot), cooking));
  CHECK_FALSE(eval_condition(lit(Condition::ExIdlePot), cooking));

  // The element-view overload agrees.
  s.chefs[0].held = Item::Dish;
  const auto views = sim::observe_elements(s, 0);
  const auto reach = nav::reachability(s, 0);
  CHECK(eval_condition(lit(Condition::HoldDish), views, reach));
  CHECK_FALSE(eval_condition(lit(Condition::HoldEmpty), views, reach));
}

TEST_CASE("walled-off counter items do not count") {
  const auto g = test::layout("forced_coordination");
  auto s = sim::reset(g);
  const sim::Coord right_wall{4, 2};
  const int point = g->point_at(right_wall);
  REQUIRE(point >= 0);
  s.counters[static_cast<size_t>(g->points()[static_cast<size_t>(point)].slot)] = Item::Onion;
  for (int chef = 0; chef < 2; ++chef) {
    const bool oracle = flood_reaches(*g, s.chefs[static_cast<size_t>(chef)].pos, right_wall);
    CHECK(eval_condition(lit(Condition::ExOnionCounter), make_context(s, chef)) == oracle);
  }
  CHECK(flood_reaches(*g, s.chefs[0].pos, right_wall));
  CHECK_FALSE(flood_reaches(*g, s.chefs[1].pos, right_wall));
}

TEST_CASE("first match over the reference program") {
  const auto p = listing1();
  Rng rng(1);
  auto onion = select_action(p, ctx(Item::Onion, {PointClass::IdlePot}), rng);
  CHECK(onion.module == 0);
  CHECK(onion.primitive == ActionPrimitive::GoIntIdlePot);

  // Module 2 wins over module 6.
  auto empty = select_action(
      p, ctx(Item::None, {PointClass::ReadyPot, PointClass::DishDisp, PointClass::DishCounter}), rng);
  CHECK(empty.module == 1);
  CHECK(empty.primitive == ActionPrimitive::GoIntDishDisp);

  auto dish_counter = select_action(p, ctx(Item::None, {PointClass::ReadyPot, PointClass::DishCounter}), rng);
  CHECK(dish_counter.module == 5);

  auto soup = select_action(p, ctx(Item::Soup, {PointClass::Serving}), rng);
  CHECK(soup.module == 7);
}

TEST_CASE("fallback draws a uniform environment action") {
  Rng rng(9);
  std::set<sim::EnvAction> seen;
  for (int i = 0; i < 300; ++i) {
    const auto c = select_action(Program{}, ctx(Item::None, {}), rng);
    CHECK(c.module == kFallback);
    CHECK_FALSE(c.primitive.has_value());
    seen.insert(c.random_action);
  }
  CHECK(seen.size() == sim::kNumEnvActions);

  // The reference program with nothing reachable also falls through.
  const auto c = select_action(listing1(), ctx(Item::Soup, {}), rng);
  CHECK(c.module == kFallback);
}

TEST_CASE("selection is deterministic under a fixed seed") {
  std::vector<sim::EnvAction> a, b;
  Rng r1(42), r2(42);
  for (int i = 0; i < 50; ++i) {
    a.push_back(select_action(Program{}, ctx(Item::None, {}), r1).random_action);
    b.push_back(select_action(Program{}, ctx(Item::None, {}), r2).random_action);
  }
  CHECK(a == b);
}
