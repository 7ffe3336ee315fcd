#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "knowpc/sim.hpp"

// Mines transition rules from buffered self-play steps.
//
// Player-caused rules are change-sets whose empirical action distribution is
// concentrated (entropy <= delta); spontaneous rules are what remains of a
// step once player- and teammate-caused changes are explained.
namespace knowpc::extractor {

using sim::EnvAction;

class ExtractorError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Symbolic record of one element: kind, point type, state, and position
// relative to the observing chef. Field order defines the canonical sort.
struct ElementInfo {
  bool is_point = false;  // false: the player
  sim::PointType type = sim::PointType::Counter;
  sim::Item item = sim::Item::None;
  int onions = 0;
  int cook_time = 0;
  sim::RelPos pos = sim::RelPos::Away;

  friend auto operator<=>(const ElementInfo&, const ElementInfo&) = default;
};

ElementInfo info_of(const sim::ElementView& view);
// `player.onion`, `dishDisp@face`, `pot.2.0@face`, `counter.empty@away`.
std::string to_string(const ElementInfo& info);
ElementInfo parse_element_info(std::string_view text);

struct ChangeRecord {
  ElementInfo before;
  ElementInfo after;

  bool unchanged() const { return before == after; }
  friend auto operator<=>(const ChangeRecord&, const ChangeRecord&) = default;
};

// `before->after`, or just `before` for an unchanged stateless point.
std::string to_string(const ChangeRecord& c);
ChangeRecord parse_change(std::string_view text);

// Order-free, duplicate-free set of changes.
class TransitionSignature {
 public:
  TransitionSignature() = default;
  explicit TransitionSignature(std::vector<ChangeRecord> changes);

  const std::vector<ChangeRecord>& changes() const { return changes_; }
  size_t size() const { return changes_.size(); }
  bool empty() const { return changes_.empty(); }
  bool contains(const ChangeRecord& c) const;
  // Subset test on change-sets.
  bool includes(const TransitionSignature& other) const;
  std::string to_string() const;
  static TransitionSignature parse(std::string_view text);

  friend auto operator<=>(const TransitionSignature&, const TransitionSignature&) = default;

 private:
  std::vector<ChangeRecord> changes_;
};

// A change tied to the element it happened to (ids as in sim::ElementView).
struct ElementChange {
  int element = 0;
  ChangeRecord change;

  friend auto operator<=>(const ElementChange&, const ElementChange&) = default;
};

// Changes between two frames of the same chef. Position markers of both infos
// are taken from the first frame. Stateless points are reported only when the
// chef is on or facing them.
std::vector<ElementChange> diff_elements(std::span<const sim::ElementView> views_t,
                                         std::span<const sim::ElementView> views_t1);
TransitionSignature signature_of(std::span<const ElementChange> changes);
std::pair<TransitionSignature, EnvAction> diff_step(std::span<const sim::ElementView> views_t,
                                                    std::span<const sim::ElementView> views_t1,
                                                    EnvAction action_t);

using ActionHistogram = std::array<std::int64_t, sim::kNumEnvActions>;

struct TransitionStats {
  TransitionSignature signature;
  ActionHistogram action_counts{};
  std::int64_t total = 0;

  void add(EnvAction a, std::int64_t n = 1);
  EnvAction modal_action() const;
};

// Shannon entropy in nats of the action distribution. Throws on an empty
// histogram.
double entropy(const ActionHistogram& counts);
double entropy(const TransitionStats& stats);

// One step seen from one chef: that chef's changes, the same step's changes
// seen from the teammate, and the chef's action.
struct StepRecord {
  std::vector<ElementChange> player;
  std::vector<ElementChange> teammate;
  EnvAction action = EnvAction::Noop;

  friend auto operator<=>(const StepRecord&, const StepRecord&) = default;
};

StepRecord make_step_record(const sim::WorldState& before, const sim::WorldState& after,
                            int chef, EnvAction action);

// Grows during training; identical step records are stored once with a count.
class TransitionBuffer {
 public:
  // Records the step from both chefs' perspectives.
  void add_step(const sim::WorldState& before, const sim::WorldState& after, EnvAction a0,
                EnvAction a1);
  void add(const StepRecord& record, std::int64_t count = 1);
  void merge(const TransitionBuffer& other);

  const std::map<StepRecord, std::int64_t>& records() const { return records_; }
  std::int64_t total() const { return total_; }
  bool empty() const { return total_ == 0; }

  // Action statistics grouped by the player-perspective signature, in
  // canonical signature order. Empty signatures are skipped.
  std::vector<TransitionStats> stats() const;

  // Newline-delimited JSON, one record per distinct step.
  void save(const std::filesystem::path& path) const;
  static TransitionBuffer load(const std::filesystem::path& path);

 private:
  std::map<StepRecord, std::int64_t> records_;
  std::int64_t total_ = 0;
};

struct ExtractorConfig {
  double delta = 0.1;
  std::int64_t min_support = 5;
};

struct PlayerRule {
  TransitionSignature signature;
  EnvAction action = EnvAction::Interact;

  friend auto operator<=>(const PlayerRule&, const PlayerRule&) = default;
};

struct RuleSets {
  std::vector<PlayerRule> player;                 // D_p
  std::vector<TransitionSignature> spontaneous;   // D_s
};

// Signatures with enough support, entropy <= delta, and at least one change
// to the player or to a point it faces or stands on.
std::vector<PlayerRule> extract_player_caused(std::span<const TransitionStats> stats,
                                              const ExtractorConfig& cfg);
std::vector<PlayerRule> extract_player_caused(
    std::span<const std::pair<TransitionSignature, EnvAction>> samples,
    const ExtractorConfig& cfg);

// Drops every candidate whose change-set strictly contains another's, and
// collapses duplicates.
std::vector<PlayerRule> prune_redundant(std::vector<PlayerRule> candidates);
std::vector<TransitionSignature> prune_redundant(std::vector<TransitionSignature> candidates);

// Same with observation counts: of two nested candidates the less supported
// one goes, the superset on ties. A rare subset is usually a step where the
// teammate undid part of the effect (onion placed and taken back).
std::vector<PlayerRule> prune_redundant(std::vector<std::pair<PlayerRule, std::int64_t>> candidates);
std::vector<TransitionSignature> prune_redundant(
    std::vector<std::pair<TransitionSignature, std::int64_t>> candidates);

struct Attribution {
  std::vector<ElementChange> player_caused;    // player-view changes
  std::vector<ElementChange> teammate_caused;  // teammate-view changes
  std::vector<ElementChange> spontaneous;      // player-view residue
};

Attribution attribute_step(const StepRecord& record, std::span<const PlayerRule> rules);

std::vector<TransitionSignature> extract_spontaneous(const TransitionBuffer& buffer,
                                                     std::span<const PlayerRule> rules,
                                                     const ExtractorConfig& cfg);

RuleSets extract_rules(const TransitionBuffer& buffer, const ExtractorConfig& cfg);

// One rule per line: `interact: a & b` and `spontaneous: c`.
std::string render_rules(const RuleSets& rules);
RuleSets parse_rules(std::string_view text);

}  // namespace knowpc::extractor
