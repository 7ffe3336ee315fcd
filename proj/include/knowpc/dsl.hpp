#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "knowpc/nav.hpp"
#include "knowpc/random.hpp"
#include "knowpc/sim.hpp"

// Policy language: an ordered list of `if <conjunction>: <action primitive>`
// modules with an implicit trailing random action.
namespace knowpc::dsl {

enum class Condition : std::uint8_t {
  HoldEmpty,
  HoldOnion,
  HoldDish,
  HoldSoup,
  ExServing,
  ExOnionDisp,
  ExDishDisp,
  ExOnionCounter,
  ExDishCounter,
  ExSoupCounter,
  ExEmptyCounter,
  ExIdlePot,
  ExReadyPot,
};
inline constexpr int kNumConditions = 13;

enum class ActionPrimitive : std::uint8_t {
  GoIntServing,
  GoIntOnionDisp,
  GoIntDishDisp,
  GoIntOnionCounter,
  GoIntDishCounter,
  GoIntSoupCounter,
  GoIntEmptyCounter,
  GoIntIdlePot,
  GoIntReadyPot,
};
inline constexpr int kNumActionPrimitives = 9;

std::array<Condition, kNumConditions> all_conditions();
std::array<ActionPrimitive, kNumActionPrimitives> all_action_primitives();

std::string_view to_string(Condition c);
std::string_view to_string(ActionPrimitive a);
std::optional<Condition> parse_condition(std::string_view name);
std::optional<ActionPrimitive> parse_action_primitive(std::string_view name);

bool is_hold(Condition c);
// Hold condition for an item, and the Ex condition for a point class.
Condition hold_condition(sim::Item item);
Condition exists_condition(sim::PointClass cls);
sim::PointClass target_class(ActionPrimitive a);
ActionPrimitive action_for(sim::PointClass cls);

// Condition primitive: a base name, optionally negated.
struct Literal {
  Condition base = Condition::HoldEmpty;
  bool negated = false;

  friend auto operator<=>(const Literal&, const Literal&) = default;
};

std::string to_string(const Literal& lit);

// True when the conjunction is satisfiable on some state: no repeated base and
// at most one positive hold, and not every hold negated.
bool consistent(std::span<const Literal> conjunction);
// Whether `lit` can be appended to `conjunction` keeping it consistent.
bool compatible(std::span<const Literal> conjunction, const Literal& lit);

struct ITModule {
  std::vector<Literal> conditions;
  ActionPrimitive action = ActionPrimitive::GoIntServing;

  friend bool operator==(const ITModule&, const ITModule&) = default;
  friend auto operator<=>(const ITModule&, const ITModule&) = default;
};

class Program {
 public:
  Program() = default;
  explicit Program(std::vector<ITModule> modules) : modules_(std::move(modules)) {}

  const std::vector<ITModule>& modules() const { return modules_; }
  size_t size() const { return modules_.size(); }
  bool empty() const { return modules_.empty(); }
  // Number of condition occurrences across all modules.
  int complexity() const;

  friend bool operator==(const Program&, const Program&) = default;

 private:
  std::vector<ITModule> modules_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

Program parse_program(std::string_view text);
Program load_program(const std::string& path);
std::string render_program(const Program& p);

// What the program has to work with at one decision point.
struct ConditionContext {
  sim::Item held = sim::Item::None;
  nav::Reachability reach;
};

ConditionContext make_context(std::span<const sim::ElementView> views,
                              const nav::Reachability& reach);
ConditionContext make_context(const sim::WorldState& state, int chef);

bool eval_condition(const Literal& lit, const ConditionContext& ctx);
bool eval_condition(const Literal& lit, std::span<const sim::ElementView> views,
                    const nav::Reachability& reach);

inline constexpr int kFallback = -1;

struct Choice {
  // Set when a module fired; otherwise `random_action` holds the fallback.
  std::optional<ActionPrimitive> primitive;
  sim::EnvAction random_action = sim::EnvAction::Noop;
  int module = kFallback;
};

// First module whose conjunction holds; else a uniform random EnvAction.
Choice select_action(const Program& p, const ConditionContext& ctx, Rng& rng);
Choice select_action(const Program& p, std::span<const sim::ElementView> views,
                     const nav::Reachability& reach, Rng& rng);

}  // namespace knowpc::dsl
