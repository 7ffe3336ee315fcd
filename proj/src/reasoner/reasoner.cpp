#include "knowpc/reasoner.hpp"

#include <algorithm>
#include <sstream>

namespace knowpc::reasoner {

using sim::Item;
using sim::PointClass;
using sim::PointType;

// ---- graph ----

int TransitionGraph::intern(const ElementInfo& info) {
  const std::string label = extractor::to_string(info);
  const bool fresh = !info.is_point && info.item == Item::None;
  if (!fresh) {
    if (auto it = by_label_.find(label); it != by_label_.end()) return it->second;
  }
  GraphNode n;
  n.kind = info.is_point ? GraphNode::Kind::Point : GraphNode::Kind::Player;
  n.label = label;
  n.info = info;
  nodes_.push_back(std::move(n));
  rules_of_.emplace_back();
  const int id = static_cast<int>(nodes_.size()) - 1;
  by_label_.emplace(label, id);  // keeps the first player.empty
  return id;
}

TransitionGraph TransitionGraph::build(const extractor::RuleSets& rules) {
  TransitionGraph g;
  auto add_rule = [&g](const extractor::TransitionSignature& sig, std::optional<sim::EnvAction> a) {
    GraphRule rule;
    for (const auto& c : sig.changes()) {
      const int before = g.intern(c.before);
      rule.prerequisites.push_back(before);
      rule.results.push_back(c.unchanged() ? before : g.intern(c.after));
    }
    if (a) {
      GraphNode n;
      n.kind = GraphNode::Kind::Action;
      n.label = std::string(sim::to_string(*a));
      n.action = *a;
      g.nodes_.push_back(std::move(n));
      g.rules_of_.emplace_back();
      rule.action_node = static_cast<int>(g.nodes_.size()) - 1;
    }
    const int id = static_cast<int>(g.rules_.size());
    for (int p : rule.prerequisites) g.rules_of_[static_cast<size_t>(p)].push_back(id);
    g.rules_.push_back(std::move(rule));
  };
  for (const auto& r : rules.player) add_rule(r.signature, r.action);
  for (const auto& s : rules.spontaneous) add_rule(s, std::nullopt);
  return g;
}

std::vector<std::pair<int, int>> TransitionGraph::edges() const {
  std::set<std::pair<int, int>> out;
  for (const auto& r : rules_) {
    for (int p : r.prerequisites) {
      if (r.action_node >= 0) {
        out.emplace(p, r.action_node);
      } else {
        for (int q : r.results) out.emplace(p, q);
      }
    }
    if (r.action_node >= 0) {
      for (int q : r.results) out.emplace(r.action_node, q);
    }
  }
  return {out.begin(), out.end()};
}

std::optional<int> TransitionGraph::find(std::string_view label) const {
  if (auto it = by_label_.find(label); it != by_label_.end()) return it->second;
  return std::nullopt;
}

std::vector<int> TransitionGraph::find_all(std::string_view label) const {
  std::vector<int> out;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].kind != GraphNode::Kind::Action && nodes_[i].label == label) {
      out.push_back(static_cast<int>(i));
    }
  }
  return out;
}

void TransitionGraph::check(int node) const {
  if (node < 0 || node >= static_cast<int>(nodes_.size())) {
    throw ReasonerError("unknown node " + std::to_string(node));
  }
}

std::set<int> TransitionGraph::conjunctive_conditions(int node) const {
  check(node);
  std::set<int> out;
  for (int r : rules_of_[static_cast<size_t>(node)]) {
    for (int p : rules_[static_cast<size_t>(r)].prerequisites) {
      if (p != node) out.insert(p);
    }
  }
  return out;
}

std::set<int> TransitionGraph::results(int node) const {
  check(node);
  std::set<int> out;
  for (int r : rules_of_[static_cast<size_t>(node)]) {
    const auto& res = rules_[static_cast<size_t>(r)].results;
    out.insert(res.begin(), res.end());
  }
  return out;
}

bool TransitionGraph::is_player_rule_prerequisite(int node) const {
  check(node);
  const auto& rs = rules_of_[static_cast<size_t>(node)];
  return std::any_of(rs.begin(), rs.end(),
                     [&](int r) { return rules_[static_cast<size_t>(r)].action_node >= 0; });
}

std::string TransitionGraph::to_dot() const {
  std::ostringstream out;
  out << "digraph transitions {\n";
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    out << "  n" << i << " [label=\"" << n.label << '"';
    if (n.kind == GraphNode::Kind::Action) out << ", shape=box";
    if (n.kind == GraphNode::Kind::Player) out << ", shape=ellipse, style=filled, fillcolor=lightgrey";
    out << "];\n";
  }
  for (const auto& [a, b] : edges()) out << "  n" << a << " -> n" << b << ";\n";
  out << "}\n";
  return out.str();
}

// ---- mapping ----

PrimitiveMapping::PrimitiveMapping() {
  mutex_.push_back({Condition::HoldEmpty, Condition::HoldOnion, Condition::HoldDish,
                    Condition::HoldSoup});
}

namespace {

std::optional<PointClass> point_class(const ElementInfo& info) {
  switch (info.type) {
    case PointType::Serving: return PointClass::Serving;
    case PointType::OnionDispenser: return PointClass::OnionDisp;
    case PointType::DishDispenser: return PointClass::DishDisp;
    case PointType::Counter:
      switch (info.item) {
        case Item::None: return PointClass::EmptyCounter;
        case Item::Onion: return PointClass::OnionCounter;
        case Item::Dish: return PointClass::DishCounter;
        case Item::Soup: return PointClass::SoupCounter;
      }
      break;
    case PointType::Pot: {
      const sim::PotState pot{info.onions, info.cook_time};
      if (pot.ready()) return PointClass::ReadyPot;
      if (pot.accepts_onion()) return PointClass::IdlePot;
      break;
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<Condition> PrimitiveMapping::condition(const ElementInfo& info) const {
  if (!info.is_point) return dsl::hold_condition(info.item);
  if (const auto cls = point_class(info)) return dsl::exists_condition(*cls);
  return std::nullopt;
}

std::optional<ActionPrimitive> PrimitiveMapping::action(const ElementInfo& info) const {
  if (!info.is_point) return std::nullopt;
  if (const auto cls = point_class(info)) return dsl::action_for(*cls);
  return std::nullopt;
}

bool PrimitiveMapping::mutually_exclusive(Condition a, Condition b) const {
  if (a == b) return false;
  return std::any_of(mutex_.begin(), mutex_.end(),
                     [&](const std::set<Condition>& g) { return g.contains(a) && g.contains(b); });
}

// ---- table ----

PreconditionTable::PreconditionTable(Map entries) : entries_(std::move(entries)) {
  for (auto& [a, lits] : entries_) {
    std::sort(lits.begin(), lits.end());
    if (!dsl::consistent(lits)) {
      throw ReasonerError("inconsistent preconditions for " + std::string(dsl::to_string(a)));
    }
  }
}

const std::vector<Literal>& PreconditionTable::at(ActionPrimitive a) const {
  auto it = entries_.find(a);
  if (it == entries_.end()) {
    throw ReasonerError("no preconditions for " + std::string(dsl::to_string(a)));
  }
  return it->second;
}

std::vector<ActionPrimitive> PreconditionTable::primitives() const {
  std::vector<ActionPrimitive> out;
  for (const auto& [a, _] : entries_) out.push_back(a);
  return out;
}

std::string render_table(const PreconditionTable& table) {
  std::string out;
  for (const auto& [a, lits] : table.entries()) {
    out += dsl::to_string(a);
    out += ':';
    for (size_t i = 0; i < lits.size(); ++i) {
      out += i == 0 ? " " : " and ";
      out += dsl::to_string(lits[i]);
    }
    out += '\n';
  }
  return out;
}

PreconditionTable parse_table(std::string_view text) {
  PreconditionTable::Map entries;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) {
      throw ReasonerError("line " + std::to_string(line_no) + ": missing ':'");
    }
    const auto action = dsl::parse_action_primitive(line.substr(0, colon));
    if (!action) {
      throw ReasonerError("line " + std::to_string(line_no) + ": unknown primitive '" +
                          line.substr(0, colon) + "'");
    }
    std::vector<Literal> lits;
    // Reuse the program parser for the conjunction.
    const auto body = line.substr(colon + 1);
    if (body.find_first_not_of(" \t\r") != std::string::npos) {
      const auto p = dsl::parse_program("if " + body + ": " + std::string(dsl::to_string(*action)));
      lits = p.modules().front().conditions;
    }
    entries[*action] = std::move(lits);
  }
  return PreconditionTable(std::move(entries));
}

std::string_view to_string(Mode m) {
  switch (m) {
    case Mode::Full: return "knowpc";
    case Mode::SingleStep: return "knowpc-m";
    case Mode::Disabled: return "pc";
  }
  return "?";
}

std::optional<Mode> parse_mode(std::string_view s) {
  for (Mode m : {Mode::Full, Mode::SingleStep, Mode::Disabled}) {
    if (to_string(m) == s) return m;
  }
  return std::nullopt;
}

// ---- inference ----

std::vector<Literal> normalize_conditions(const std::set<Condition>& conditions) {
  std::vector<Literal> out;
  std::vector<Condition> holds;
  for (Condition c : conditions) {
    if (dsl::is_hold(c)) {
      holds.push_back(c);
    } else {
      out.push_back({c, false});
    }
  }
  if (holds.size() == 1) {
    out.push_back({holds.front(), false});
  } else if (holds.size() > 1) {
    for (Item item : {Item::None, Item::Onion, Item::Dish, Item::Soup}) {
      const Condition h = dsl::hold_condition(item);
      if (std::find(holds.begin(), holds.end(), h) == holds.end()) out.push_back({h, true});
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

PreconditionTable infer_preconditions(const TransitionGraph& graph,
                                      const PrimitiveMapping& mapping, Mode mode) {
  if (mode == Mode::Disabled) return {};
  std::map<ActionPrimitive, std::set<Condition>> acc;
  const auto& nodes = graph.nodes();
  for (size_t i = 0; i < nodes.size(); ++i) {
    const int node = static_cast<int>(i);
    if (nodes[i].kind != GraphNode::Kind::Point) continue;
    const auto action = mapping.action(nodes[i].info);
    if (!action) continue;
    const auto cc = graph.conjunctive_conditions(node);
    if (cc.empty() && !graph.is_player_rule_prerequisite(node)) continue;
    auto& conds = acc[*action];

    if (graph.is_player_rule_prerequisite(node)) {
      if (auto self = mapping.condition(nodes[i].info)) conds.insert(*self);
    }
    std::vector<Condition> own;
    for (int k : cc) {
      if (auto c = mapping.condition(nodes[static_cast<size_t>(k)].info)) {
        conds.insert(*c);
        own.push_back(*c);
      }
    }
    if (mode != Mode::Full) continue;

    for (int j : graph.results(node)) {
      for (int k : graph.conjunctive_conditions(j)) {
        const auto c = mapping.condition(nodes[static_cast<size_t>(k)].info);
        if (!c) continue;
        const bool blocked = std::any_of(own.begin(), own.end(), [&](Condition o) {
          return mapping.mutually_exclusive(*c, o);
        });
        if (!blocked) conds.insert(*c);
      }
    }
  }
  PreconditionTable::Map entries;
  for (const auto& [a, conds] : acc) entries[a] = normalize_conditions(conds);
  return PreconditionTable(std::move(entries));
}

PreconditionTable infer_preconditions(const extractor::RuleSets& rules, Mode mode) {
  return infer_preconditions(TransitionGraph::build(rules), PrimitiveMapping{}, mode);
}

}  // namespace knowpc::reasoner
