#pragma once

#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "knowpc/dsl.hpp"
#include "knowpc/extractor.hpp"

// Transition graph over mined rules and precondition inference for action
// primitives.
namespace knowpc::reasoner {

using dsl::ActionPrimitive;
using dsl::Condition;
using dsl::Literal;
using extractor::ElementInfo;

class ReasonerError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GraphNode {
  enum class Kind { Player, Point, Action };
  Kind kind = Kind::Player;
  std::string label;
  ElementInfo info;                     // unused for action nodes
  sim::EnvAction action = sim::EnvAction::Noop;  // action nodes only
};

// One rule instantiated in the graph. `action_node` is -1 for spontaneous
// rules, whose prerequisites point straight at their results.
struct GraphRule {
  std::vector<int> prerequisites;
  std::vector<int> results;
  int action_node = -1;
};

class TransitionGraph {
 public:
  // Nodes are shared by canonical label, except that every `player.empty`
  // occurrence gets its own node. Unchanged stateless points are both
  // prerequisite and result of their rule.
  static TransitionGraph build(const extractor::RuleSets& rules);

  const std::vector<GraphNode>& nodes() const { return nodes_; }
  const std::vector<GraphRule>& rules() const { return rules_; }
  std::vector<std::pair<int, int>> edges() const;

  // First node with this label.
  std::optional<int> find(std::string_view label) const;
  std::vector<int> find_all(std::string_view label) const;

  // Other prerequisites of every rule `node` is a prerequisite of.
  std::set<int> conjunctive_conditions(int node) const;
  // Results of every rule `node` is a prerequisite of.
  std::set<int> results(int node) const;
  bool is_player_rule_prerequisite(int node) const;

  // Graphviz digraph; action nodes are boxes.
  std::string to_dot() const;

 private:
  int intern(const ElementInfo& info);
  void check(int node) const;

  std::vector<GraphNode> nodes_;
  std::vector<GraphRule> rules_;
  std::map<std::string, int, std::less<>> by_label_;
  std::vector<std::vector<int>> rules_of_;  // rules each node is a prerequisite of
};

// Fixed lookup from element infos to condition and action primitives.
// Position markers are ignored. Cooking pots map to nothing.
class PrimitiveMapping {
 public:
  PrimitiveMapping();

  std::optional<Condition> condition(const ElementInfo& info) const;  // M_c
  std::optional<ActionPrimitive> action(const ElementInfo& info) const;  // M_a
  bool mutually_exclusive(Condition a, Condition b) const;
  const std::vector<std::set<Condition>>& mutex_groups() const { return mutex_; }

 private:
  std::vector<std::set<Condition>> mutex_;
};

// Preconditions per action primitive, each a sorted consistent conjunction.
class PreconditionTable {
 public:
  using Map = std::map<ActionPrimitive, std::vector<Literal>>;

  PreconditionTable() = default;
  explicit PreconditionTable(Map entries);

  const Map& entries() const { return entries_; }
  bool empty() const { return entries_.empty(); }
  bool has(ActionPrimitive a) const { return entries_.contains(a); }
  const std::vector<Literal>& at(ActionPrimitive a) const;
  std::vector<ActionPrimitive> primitives() const;

  friend bool operator==(const PreconditionTable&, const PreconditionTable&) = default;

 private:
  Map entries_;
};

// `GoIntServing: ExServing and HoldSoup`, one line per primitive.
std::string render_table(const PreconditionTable& table);
PreconditionTable parse_table(std::string_view text);

enum class Mode {
  Full,        // single- and multi-step
  SingleStep,  // no multi-step pass
  Disabled,    // empty table
};

std::string_view to_string(Mode m);
std::optional<Mode> parse_mode(std::string_view s);

// Two or more positive hold conditions in one entry are replaced by the
// negation of the remaining hold conditions, which is what their union means.
std::vector<Literal> normalize_conditions(const std::set<Condition>& conditions);

// Besides the conjunctive conditions of a point and of its results, every
// point that is a prerequisite of a player-caused rule requires its own
// existence condition.
PreconditionTable infer_preconditions(const TransitionGraph& graph,
                                      const PrimitiveMapping& mapping, Mode mode = Mode::Full);

PreconditionTable infer_preconditions(const extractor::RuleSets& rules, Mode mode = Mode::Full);

}  // namespace knowpc::reasoner
