#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "knowpc/extractor.hpp"

namespace knowpc::extractor {

void TransitionStats::add(EnvAction a, std::int64_t n) {
  action_counts[static_cast<size_t>(a)] += n;
  total += n;
}

EnvAction TransitionStats::modal_action() const {
  size_t best = 0;
  for (size_t i = 1; i < action_counts.size(); ++i) {
    if (action_counts[i] > action_counts[best]) best = i;
  }
  return sim::kAllEnvActions[best];
}

double entropy(const ActionHistogram& counts) {
  std::int64_t total = 0;
  for (auto c : counts) {
    if (c < 0) throw ExtractorError("negative action count");
    total += c;
  }
  if (total == 0) throw ExtractorError("entropy of an empty histogram");
  double h = 0.0;
  for (auto c : counts) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / static_cast<double>(total);
    h -= p * std::log(p);
  }
  return h;
}

double entropy(const TransitionStats& stats) { return entropy(stats.action_counts); }

// ---- buffer ----

StepRecord make_step_record(const sim::WorldState& before, const sim::WorldState& after,
                            int chef, EnvAction action) {
  const int mate = 1 - chef;
  StepRecord r;
  r.player = diff_elements(sim::observe_elements(before, chef), sim::observe_elements(after, chef));
  r.teammate = diff_elements(sim::observe_elements(before, mate), sim::observe_elements(after, mate));
  r.action = action;
  return r;
}

void TransitionBuffer::add_step(const sim::WorldState& before, const sim::WorldState& after,
                                EnvAction a0, EnvAction a1) {
  auto d0 = diff_elements(sim::observe_elements(before, 0), sim::observe_elements(after, 0));
  auto d1 = diff_elements(sim::observe_elements(before, 1), sim::observe_elements(after, 1));
  add(StepRecord{d0, d1, a0});
  add(StepRecord{std::move(d1), std::move(d0), a1});
}

void TransitionBuffer::add(const StepRecord& record, std::int64_t count) {
  records_[record] += count;
  total_ += count;
}

void TransitionBuffer::merge(const TransitionBuffer& other) {
  for (const auto& [rec, n] : other.records_) add(rec, n);
}

std::vector<TransitionStats> TransitionBuffer::stats() const {
  std::map<TransitionSignature, TransitionStats> grouped;
  for (const auto& [rec, n] : records_) {
    auto sig = signature_of(rec.player);
    if (sig.empty()) continue;
    auto& s = grouped[sig];
    if (s.total == 0) s.signature = sig;
    s.add(rec.action, n);
  }
  std::vector<TransitionStats> out;
  out.reserve(grouped.size());
  for (auto& [sig, s] : grouped) out.push_back(std::move(s));
  return out;
}

namespace {

nlohmann::json changes_to_json(const std::vector<ElementChange>& changes) {
  auto arr = nlohmann::json::array();
  for (const auto& c : changes) arr.push_back({c.element, to_string(c.change)});
  return arr;
}

std::vector<ElementChange> changes_from_json(const nlohmann::json& arr) {
  std::vector<ElementChange> out;
  for (const auto& item : arr) {
    out.push_back({item.at(0).get<int>(), parse_change(item.at(1).get<std::string>())});
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

void TransitionBuffer::save(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw ExtractorError("cannot write buffer " + path.string());
  for (const auto& [rec, n] : records_) {
    nlohmann::json j;
    j["signature"] = signature_of(rec.player).to_string();
    j["action"] = std::string(sim::to_string(rec.action));
    j["count"] = n;
    j["player"] = changes_to_json(rec.player);
    j["teammate"] = changes_to_json(rec.teammate);
    out << j.dump() << '\n';
  }
}

TransitionBuffer TransitionBuffer::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ExtractorError("cannot read buffer " + path.string());
  TransitionBuffer buf;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    StepRecord rec;
    const auto action = sim::parse_env_action(j.at("action").get<std::string>());
    if (!action) throw ExtractorError("bad action in buffer record");
    rec.action = *action;
    rec.player = changes_from_json(j.at("player"));
    rec.teammate = changes_from_json(j.at("teammate"));
    buf.add(rec, j.at("count").get<std::int64_t>());
  }
  return buf;
}

// ---- mining ----

namespace {

// A chef's interaction can only change the chef itself or the point it faces
// or stands on. Anything else in a low-entropy signature is a coincidence of
// the policy that generated the data.
bool has_direct_effect(const TransitionSignature& sig) {
  return std::any_of(sig.changes().begin(), sig.changes().end(), [](const ChangeRecord& c) {
    if (c.unchanged()) return false;
    return !c.before.is_point || c.before.pos != sim::RelPos::Away;
  });
}

}  // namespace

std::vector<PlayerRule> extract_player_caused(std::span<const TransitionStats> stats,
                                              const ExtractorConfig& cfg) {
  std::vector<PlayerRule> out;
  for (const auto& s : stats) {
    if (s.signature.empty() || s.total < cfg.min_support) continue;
    if (!has_direct_effect(s.signature) || entropy(s) > cfg.delta) continue;
    out.push_back({s.signature, s.modal_action()});
  }
  return out;
}

std::vector<PlayerRule> extract_player_caused(
    std::span<const std::pair<TransitionSignature, EnvAction>> samples,
    const ExtractorConfig& cfg) {
  std::map<TransitionSignature, TransitionStats> grouped;
  for (const auto& [sig, a] : samples) {
    if (sig.empty()) continue;
    auto& s = grouped[sig];
    s.signature = sig;
    s.add(a);
  }
  std::vector<TransitionStats> stats;
  for (auto& [sig, s] : grouped) stats.push_back(std::move(s));
  return extract_player_caused(stats, cfg);
}

namespace {

template <typename T, typename SigOf>
std::vector<T> prune_impl(std::vector<std::pair<T, std::int64_t>> items, SigOf sig_of) {
  std::sort(items.begin(), items.end());
  items.erase(std::unique(items.begin(), items.end(),
                          [&](const auto& a, const auto& b) {
                            return sig_of(a.first) == sig_of(b.first);
                          }),
              items.end());
  std::vector<T> kept;
  for (size_t i = 0; i < items.size(); ++i) {
    const auto& me = sig_of(items[i].first);
    bool redundant = false;
    for (size_t j = 0; j < items.size() && !redundant; ++j) {
      if (i == j) continue;
      const auto& other = sig_of(items[j].first);
      if (other.size() < me.size() && me.includes(other)) {
        redundant = items[i].second <= items[j].second;
      } else if (me.size() < other.size() && other.includes(me)) {
        redundant = items[i].second < items[j].second;
      }
    }
    if (!redundant) kept.push_back(items[i].first);
  }
  return kept;
}

template <typename T>
std::vector<std::pair<T, std::int64_t>> unit_support(std::vector<T> items) {
  std::vector<std::pair<T, std::int64_t>> out;
  for (auto& x : items) out.emplace_back(std::move(x), 1);
  return out;
}

const TransitionSignature& rule_sig(const PlayerRule& r) { return r.signature; }
const TransitionSignature& plain_sig(const TransitionSignature& s) { return s; }

// Removes from `pool` one element change per change in `rule`, if every
// change of the rule is present. Returns the removed changes.
std::optional<std::vector<ElementChange>> match_rule(const TransitionSignature& rule,
                                                     std::vector<ElementChange>& pool) {
  std::vector<size_t> picked;
  for (const auto& want : rule.changes()) {
    bool found = false;
    for (size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].change != want) continue;
      if (std::find(picked.begin(), picked.end(), i) != picked.end()) continue;
      picked.push_back(i);
      found = true;
      break;
    }
    if (!found) return std::nullopt;
  }
  std::sort(picked.begin(), picked.end());
  std::vector<ElementChange> matched;
  for (auto it = picked.rbegin(); it != picked.rend(); ++it) {
    matched.push_back(pool[*it]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(*it));
  }
  std::sort(matched.begin(), matched.end());
  return matched;
}

bool is_unchanged_stateless(const ElementChange& c) {
  return c.change.before.is_point && sim::is_stateless(c.change.before.type) && c.change.unchanged();
}

}  // namespace

std::vector<PlayerRule> prune_redundant(std::vector<PlayerRule> candidates) {
  return prune_impl<PlayerRule>(unit_support(std::move(candidates)), rule_sig);
}

std::vector<TransitionSignature> prune_redundant(std::vector<TransitionSignature> candidates) {
  return prune_impl<TransitionSignature>(unit_support(std::move(candidates)), plain_sig);
}

std::vector<PlayerRule> prune_redundant(std::vector<std::pair<PlayerRule, std::int64_t>> candidates) {
  return prune_impl<PlayerRule>(std::move(candidates), rule_sig);
}

std::vector<TransitionSignature> prune_redundant(
    std::vector<std::pair<TransitionSignature, std::int64_t>> candidates) {
  return prune_impl<TransitionSignature>(std::move(candidates), plain_sig);
}

Attribution attribute_step(const StepRecord& record, std::span<const PlayerRule> rules) {
  Attribution out;
  std::vector<ElementChange> remaining = record.player;
  for (const auto& rule : rules) {
    if (auto m = match_rule(rule.signature, remaining)) {
      out.player_caused.insert(out.player_caused.end(), m->begin(), m->end());
    }
  }

  // Same step from the teammate's side, minus points the player already
  // explains. Element 0 there is the teammate itself.
  std::vector<ElementChange> mate_pool;
  for (const auto& c : record.teammate) {
    const bool explained =
        c.element != 0 && std::any_of(out.player_caused.begin(), out.player_caused.end(),
                                      [&](const ElementChange& p) { return p.element == c.element; });
    if (!explained) mate_pool.push_back(c);
  }
  for (const auto& rule : rules) {
    if (auto m = match_rule(rule.signature, mate_pool)) {
      out.teammate_caused.insert(out.teammate_caused.end(), m->begin(), m->end());
    }
  }

  for (const auto& c : remaining) {
    // A chef's hold changes only through its own interaction, so an
    // unmatched player change is noise rather than environment dynamics.
    if (is_unchanged_stateless(c) || c.element == 0) continue;
    const bool by_mate =
        c.element != 0 && std::any_of(out.teammate_caused.begin(), out.teammate_caused.end(),
                                      [&](const ElementChange& m) { return m.element == c.element; });
    if (!by_mate) out.spontaneous.push_back(c);
  }
  std::sort(out.player_caused.begin(), out.player_caused.end());
  std::sort(out.teammate_caused.begin(), out.teammate_caused.end());
  return out;
}

std::vector<TransitionSignature> extract_spontaneous(const TransitionBuffer& buffer,
                                                     std::span<const PlayerRule> rules,
                                                     const ExtractorConfig& cfg) {
  std::map<TransitionSignature, std::int64_t> support;
  for (const auto& [rec, n] : buffer.records()) {
    const auto attribution = attribute_step(rec, rules);
    if (attribution.spontaneous.empty()) continue;
    support[signature_of(attribution.spontaneous)] += n;
  }
  std::vector<std::pair<TransitionSignature, std::int64_t>> out;
  for (const auto& [sig, n] : support) {
    if (n < cfg.min_support) continue;
    const bool is_player_rule = std::any_of(rules.begin(), rules.end(),
                                            [&](const PlayerRule& r) { return r.signature == sig; });
    if (!is_player_rule) out.emplace_back(sig, n);
  }
  return prune_redundant(std::move(out));
}

RuleSets extract_rules(const TransitionBuffer& buffer, const ExtractorConfig& cfg) {
  RuleSets rules;
  const auto stats = buffer.stats();
  std::map<TransitionSignature, std::int64_t> support;
  for (const auto& s : stats) support[s.signature] = s.total;
  std::vector<std::pair<PlayerRule, std::int64_t>> candidates;
  for (auto& r : extract_player_caused(stats, cfg)) {
    const auto n = support.at(r.signature);
    candidates.emplace_back(std::move(r), n);
  }
  rules.player = prune_redundant(std::move(candidates));
  rules.spontaneous = extract_spontaneous(buffer, rules.player, cfg);
  return rules;
}

std::string render_rules(const RuleSets& rules) {
  std::ostringstream out;
  for (const auto& r : rules.player) {
    out << sim::to_string(r.action) << ": " << r.signature.to_string() << '\n';
  }
  for (const auto& s : rules.spontaneous) out << "spontaneous: " << s.to_string() << '\n';
  return out.str();
}

RuleSets parse_rules(std::string_view text) {
  RuleSets rules;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ExtractorError("bad rule line '" + line + "'");
    const auto head = line.substr(0, colon);
    auto sig = TransitionSignature::parse(std::string_view(line).substr(colon + 1));
    if (head == "spontaneous") {
      rules.spontaneous.push_back(std::move(sig));
    } else if (const auto a = sim::parse_env_action(head)) {
      rules.player.push_back({std::move(sig), *a});
    } else {
      throw ExtractorError("bad rule kind '" + head + "'");
    }
  }
  return rules;
}

}  // namespace knowpc::extractor
