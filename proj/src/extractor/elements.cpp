#include <algorithm>
#include <charconv>

#include "knowpc/extractor.hpp"

namespace knowpc::extractor {

using sim::Item;
using sim::PointType;
using sim::RelPos;

ElementInfo info_of(const sim::ElementView& v) {
  ElementInfo info;
  info.is_point = !v.is_player;
  if (v.is_player) {
    info.item = v.item;
    return info;
  }
  info.type = v.type;
  info.pos = v.pos;
  if (v.type == PointType::Counter) info.item = v.item;
  if (v.type == PointType::Pot) {
    info.onions = v.pot.onions;
    info.cook_time = v.pot.cook_time;
  }
  return info;
}

std::string to_string(const ElementInfo& info) {
  std::string out;
  if (!info.is_point) {
    out = "player.";
    out += sim::to_string(info.item);
    return out;
  }
  out = sim::to_string(info.type);
  if (info.type == PointType::Counter) {
    out += '.';
    out += sim::to_string(info.item);
  } else if (info.type == PointType::Pot) {
    out += '.' + std::to_string(info.onions) + '.' + std::to_string(info.cook_time);
  }
  out += '@';
  out += sim::to_string(info.pos);
  return out;
}

namespace {

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  size_t start = 0;
  while (true) {
    const size_t at = s.find(sep, start);
    if (at == std::string_view::npos) {
      parts.push_back(s.substr(start));
      return parts;
    }
    parts.push_back(s.substr(start, at - start));
    start = at + 1;
  }
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r\n") - first + 1);
}

Item parse_item(std::string_view s, std::string_view whole) {
  for (Item i : {Item::None, Item::Onion, Item::Dish, Item::Soup}) {
    if (sim::to_string(i) == s) return i;
  }
  throw ExtractorError("bad item in element '" + std::string(whole) + "'");
}

int parse_int(std::string_view s, std::string_view whole) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw ExtractorError("bad number in element '" + std::string(whole) + "'");
  }
  return v;
}

}  // namespace

ElementInfo parse_element_info(std::string_view text) {
  text = trim(text);
  ElementInfo info;
  const auto at = text.find('@');
  const auto head = split(text.substr(0, at), '.');
  if (head[0] == "player") {
    if (at != std::string_view::npos || head.size() != 2) {
      throw ExtractorError("bad player element '" + std::string(text) + "'");
    }
    info.item = parse_item(head[1], text);
    return info;
  }
  if (at == std::string_view::npos) {
    throw ExtractorError("missing position in element '" + std::string(text) + "'");
  }
  info.is_point = true;
  const auto pos = text.substr(at + 1);
  bool pos_ok = false;
  for (RelPos p : {RelPos::On, RelPos::Face, RelPos::Away}) {
    if (sim::to_string(p) == pos) {
      info.pos = p;
      pos_ok = true;
    }
  }
  if (!pos_ok) throw ExtractorError("bad position in element '" + std::string(text) + "'");

  bool type_ok = false;
  for (PointType t : {PointType::OnionDispenser, PointType::DishDispenser, PointType::Counter,
                      PointType::Pot, PointType::Serving}) {
    if (sim::to_string(t) == head[0]) {
      info.type = t;
      type_ok = true;
    }
  }
  if (!type_ok) throw ExtractorError("unknown element type in '" + std::string(text) + "'");
  const size_t expected = info.type == PointType::Pot ? 3 : info.type == PointType::Counter ? 2 : 1;
  if (head.size() != expected) throw ExtractorError("bad state in element '" + std::string(text) + "'");
  if (info.type == PointType::Counter) info.item = parse_item(head[1], text);
  if (info.type == PointType::Pot) {
    info.onions = parse_int(head[1], text);
    info.cook_time = parse_int(head[2], text);
  }
  return info;
}

std::string to_string(const ChangeRecord& c) {
  if (c.unchanged()) return to_string(c.before);
  return to_string(c.before) + "->" + to_string(c.after);
}

ChangeRecord parse_change(std::string_view text) {
  text = trim(text);
  const auto arrow = text.find("->");
  if (arrow == std::string_view::npos) {
    const auto info = parse_element_info(text);
    return {info, info};
  }
  return {parse_element_info(text.substr(0, arrow)), parse_element_info(text.substr(arrow + 2))};
}

TransitionSignature::TransitionSignature(std::vector<ChangeRecord> changes)
    : changes_(std::move(changes)) {
  std::sort(changes_.begin(), changes_.end());
  changes_.erase(std::unique(changes_.begin(), changes_.end()), changes_.end());
}

bool TransitionSignature::contains(const ChangeRecord& c) const {
  return std::binary_search(changes_.begin(), changes_.end(), c);
}

bool TransitionSignature::includes(const TransitionSignature& other) const {
  return std::includes(changes_.begin(), changes_.end(), other.changes_.begin(),
                       other.changes_.end());
}

std::string TransitionSignature::to_string() const {
  std::string out;
  for (size_t i = 0; i < changes_.size(); ++i) {
    if (i > 0) out += " & ";
    out += extractor::to_string(changes_[i]);
  }
  return out;
}

TransitionSignature TransitionSignature::parse(std::string_view text) {
  std::vector<ChangeRecord> changes;
  if (trim(text).empty()) return {};
  for (auto part : split(text, '&')) changes.push_back(parse_change(part));
  return TransitionSignature(std::move(changes));
}

std::vector<ElementChange> diff_elements(std::span<const sim::ElementView> views_t,
                                         std::span<const sim::ElementView> views_t1) {
  if (views_t.size() != views_t1.size()) {
    throw ExtractorError("element count differs between frames");
  }
  std::vector<ElementChange> out;
  for (size_t i = 0; i < views_t.size(); ++i) {
    const auto& a = views_t[i];
    const auto& b = views_t1[i];
    if (a.id != b.id || a.is_player != b.is_player || a.type != b.type) {
      throw ExtractorError("element identity mismatch at index " + std::to_string(i));
    }
    ElementInfo before = info_of(a);
    ElementInfo after = info_of(b);
    after.pos = before.pos;
    const bool stateless = !a.is_player && sim::is_stateless(a.type);
    if (stateless) {
      if (a.pos == RelPos::Away) continue;
    } else if (before == after) {
      continue;
    }
    out.push_back({a.id, {before, after}});
  }
  return out;
}

TransitionSignature signature_of(std::span<const ElementChange> changes) {
  std::vector<ChangeRecord> records;
  records.reserve(changes.size());
  for (const auto& c : changes) records.push_back(c.change);
  return TransitionSignature(std::move(records));
}

std::pair<TransitionSignature, EnvAction> diff_step(std::span<const sim::ElementView> views_t,
                                                    std::span<const sim::ElementView> views_t1,
                                                    EnvAction action_t) {
  const auto changes = diff_elements(views_t, views_t1);
  return {signature_of(changes), action_t};
}

}  // namespace knowpc::extractor
