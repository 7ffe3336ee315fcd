#include "knowpc/dsl.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace knowpc::dsl {

using sim::Item;
using sim::PointClass;

namespace {

constexpr std::array<std::string_view, kNumConditions> kConditionNames{
    "HoldEmpty",      "HoldOnion",     "HoldDish",      "HoldSoup",       "ExServing",
    "ExOnionDisp",    "ExDishDisp",    "ExOnionCounter", "ExDishCounter", "ExSoupCounter",
    "ExEmptyCounter", "ExIdlePot",     "ExReadyPot"};

constexpr std::array<std::string_view, kNumActionPrimitives> kActionNames{
    "GoIntServing",     "GoIntOnionDisp",   "GoIntDishDisp",
    "GoIntOnionCounter", "GoIntDishCounter", "GoIntSoupCounter",
    "GoIntEmptyCounter", "GoIntIdlePot",     "GoIntReadyPot"};

}  // namespace

std::array<Condition, kNumConditions> all_conditions() {
  std::array<Condition, kNumConditions> out{};
  for (int i = 0; i < kNumConditions; ++i) out[static_cast<size_t>(i)] = static_cast<Condition>(i);
  return out;
}

std::array<ActionPrimitive, kNumActionPrimitives> all_action_primitives() {
  std::array<ActionPrimitive, kNumActionPrimitives> out{};
  for (int i = 0; i < kNumActionPrimitives; ++i) {
    out[static_cast<size_t>(i)] = static_cast<ActionPrimitive>(i);
  }
  return out;
}

std::string_view to_string(Condition c) { return kConditionNames[static_cast<size_t>(c)]; }
std::string_view to_string(ActionPrimitive a) { return kActionNames[static_cast<size_t>(a)]; }

std::optional<Condition> parse_condition(std::string_view name) {
  for (size_t i = 0; i < kConditionNames.size(); ++i) {
    if (kConditionNames[i] == name) return static_cast<Condition>(i);
  }
  return std::nullopt;
}

std::optional<ActionPrimitive> parse_action_primitive(std::string_view name) {
  for (size_t i = 0; i < kActionNames.size(); ++i) {
    if (kActionNames[i] == name) return static_cast<ActionPrimitive>(i);
  }
  return std::nullopt;
}

bool is_hold(Condition c) { return static_cast<int>(c) <= static_cast<int>(Condition::HoldSoup); }

Condition hold_condition(Item item) {
  switch (item) {
    case Item::None: return Condition::HoldEmpty;
    case Item::Onion: return Condition::HoldOnion;
    case Item::Dish: return Condition::HoldDish;
    case Item::Soup: return Condition::HoldSoup;
  }
  return Condition::HoldEmpty;
}

Condition exists_condition(PointClass cls) {
  switch (cls) {
    case PointClass::Serving: return Condition::ExServing;
    case PointClass::OnionDisp: return Condition::ExOnionDisp;
    case PointClass::DishDisp: return Condition::ExDishDisp;
    case PointClass::OnionCounter: return Condition::ExOnionCounter;
    case PointClass::DishCounter: return Condition::ExDishCounter;
    case PointClass::SoupCounter: return Condition::ExSoupCounter;
    case PointClass::EmptyCounter: return Condition::ExEmptyCounter;
    case PointClass::IdlePot: return Condition::ExIdlePot;
    case PointClass::ReadyPot: return Condition::ExReadyPot;
  }
  return Condition::ExServing;
}

// Action primitives and point classes share their order.
PointClass target_class(ActionPrimitive a) { return static_cast<PointClass>(a); }
ActionPrimitive action_for(PointClass cls) { return static_cast<ActionPrimitive>(cls); }

std::string to_string(const Literal& lit) {
  std::string out = lit.negated ? "not " : "";
  out += to_string(lit.base);
  return out;
}

bool consistent(std::span<const Literal> conjunction) {
  int positive_holds = 0;
  int negated_holds = 0;
  for (size_t i = 0; i < conjunction.size(); ++i) {
    for (size_t j = i + 1; j < conjunction.size(); ++j) {
      if (conjunction[i].base == conjunction[j].base) return false;
    }
    if (is_hold(conjunction[i].base)) {
      (conjunction[i].negated ? negated_holds : positive_holds) += 1;
    }
  }
  return positive_holds <= 1 && negated_holds < 4;
}

bool compatible(std::span<const Literal> conjunction, const Literal& lit) {
  std::vector<Literal> extended(conjunction.begin(), conjunction.end());
  extended.push_back(lit);
  return consistent(extended);
}

int Program::complexity() const {
  int n = 0;
  for (const auto& m : modules_) n += static_cast<int>(m.conditions.size());
  return n;
}

// ---- text format ----

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_words(std::string_view s) {
  std::vector<std::string_view> words;
  size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
    size_t j = i;
    while (j < s.size() && s[j] != ' ' && s[j] != '\t') ++j;
    if (j > i) words.push_back(s.substr(i, j - i));
    i = j;
  }
  return words;
}

std::vector<Literal> parse_conjunction(std::string_view text, int line) {
  const auto words = split_words(text);
  if (words.empty()) throw ParseError(line, "empty conjunction");
  std::vector<Literal> out;
  size_t i = 0;
  while (true) {
    Literal lit;
    if (i < words.size() && words[i] == "not") {
      lit.negated = true;
      ++i;
    }
    if (i >= words.size()) throw ParseError(line, "expected condition primitive");
    if (words[i] == "if") throw ParseError(line, "nested if is not allowed");
    const auto base = parse_condition(words[i]);
    if (!base) throw ParseError(line, "unknown primitive '" + std::string(words[i]) + "'");
    lit.base = *base;
    for (const auto& prev : out) {
      if (prev.base == lit.base) {
        throw ParseError(line, prev.negated != lit.negated
                                   ? "contradictory conjunction: " + std::string(to_string(lit.base))
                                   : "duplicate condition " + std::string(to_string(lit.base)));
      }
    }
    out.push_back(lit);
    ++i;
    if (i == words.size()) break;
    if (words[i] != "and") throw ParseError(line, "expected 'and', got '" + std::string(words[i]) + "'");
    ++i;
    if (i == words.size()) throw ParseError(line, "dangling 'and'");
  }
  if (!consistent(out)) throw ParseError(line, "contradictory conjunction: mutually exclusive holds");
  return out;
}

ActionPrimitive parse_action_line(std::string_view text, int line) {
  const auto words = split_words(text);
  if (words.empty()) throw ParseError(line, "missing action primitive");
  if (words[0] == "if") throw ParseError(line, "nested if is not allowed");
  if (words.size() != 1) throw ParseError(line, "expected a single action primitive");
  const auto a = parse_action_primitive(words[0]);
  if (!a) throw ParseError(line, "unknown primitive '" + std::string(words[0]) + "'");
  return *a;
}

}  // namespace

Program parse_program(std::string_view text) {
  std::vector<ITModule> modules;
  std::optional<std::vector<Literal>> pending;  // conditions awaiting their action line
  bool done = false;
  int line_no = 0;
  size_t pos = 0;
  while (pos <= text.size()) {
    const size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    if (done) throw ParseError(line_no, "content after RandomAct");
    if (pending) {
      modules.push_back({std::move(*pending), parse_action_line(line, line_no)});
      pending.reset();
    } else if (line.starts_with("if ") || line == "if" || line.starts_with("if:")) {
      const auto colon = line.find(':');
      if (colon == std::string_view::npos) throw ParseError(line_no, "missing ':' after conjunction");
      auto conds = parse_conjunction(line.substr(2, colon - 2), line_no);
      const auto rest = trim(line.substr(colon + 1));
      if (rest.empty()) {
        pending = std::move(conds);
      } else {
        modules.push_back({std::move(conds), parse_action_line(rest, line_no)});
      }
    } else if (line == "RandomAct") {
      done = true;
    } else {
      throw ParseError(line_no, "expected 'if' or 'RandomAct', got '" + std::string(line) + "'");
    }
    if (end == text.size()) break;
  }
  if (pending) throw ParseError(line_no, "missing action primitive after final 'if'");
  return Program(std::move(modules));
}

Program load_program(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open program file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

std::string render_program(const Program& p) {
  std::string out;
  for (const auto& m : p.modules()) {
    out += "if ";
    for (size_t i = 0; i < m.conditions.size(); ++i) {
      if (i > 0) out += " and ";
      out += to_string(m.conditions[i]);
    }
    out += ":\n\t";
    out += to_string(m.action);
    out += '\n';
  }
  out += "RandomAct\n";
  return out;
}

// ---- interpreter ----

ConditionContext make_context(std::span<const sim::ElementView> views,
                              const nav::Reachability& reach) {
  ConditionContext ctx;
  ctx.reach = reach;
  for (const auto& v : views) {
    if (v.is_player) {
      ctx.held = v.item;
      break;
    }
  }
  return ctx;
}

ConditionContext make_context(const sim::WorldState& state, int chef) {
  return {state.chefs[static_cast<size_t>(chef)].held, nav::reachability(state, chef)};
}

bool eval_condition(const Literal& lit, const ConditionContext& ctx) {
  bool value = false;
  switch (lit.base) {
    case Condition::HoldEmpty: value = ctx.held == Item::None; break;
    case Condition::HoldOnion: value = ctx.held == Item::Onion; break;
    case Condition::HoldDish: value = ctx.held == Item::Dish; break;
    case Condition::HoldSoup: value = ctx.held == Item::Soup; break;
    default:
      value = ctx.reach.contains(static_cast<PointClass>(static_cast<int>(lit.base) -
                                                         static_cast<int>(Condition::ExServing)));
      break;
  }
  return value != lit.negated;
}

bool eval_condition(const Literal& lit, std::span<const sim::ElementView> views,
                    const nav::Reachability& reach) {
  return eval_condition(lit, make_context(views, reach));
}

Choice select_action(const Program& p, const ConditionContext& ctx, Rng& rng) {
  const auto& modules = p.modules();
  for (size_t i = 0; i < modules.size(); ++i) {
    const auto& m = modules[i];
    const bool fires = std::all_of(m.conditions.begin(), m.conditions.end(),
                                   [&](const Literal& l) { return eval_condition(l, ctx); });
    if (fires) return Choice{m.action, sim::EnvAction::Noop, static_cast<int>(i)};
  }
  Choice c;
  c.random_action = sim::kAllEnvActions[static_cast<size_t>(uniform_int(rng, 0, sim::kNumEnvActions - 1))];
  return c;
}

Choice select_action(const Program& p, std::span<const sim::ElementView> views,
                     const nav::Reachability& reach, Rng& rng) {
  return select_action(p, make_context(views, reach), rng);
}

}  // namespace knowpc::dsl
