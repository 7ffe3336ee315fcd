#include <sstream>

#include "knowpc/play_server.hpp"

namespace knowpc::play {

using nlohmann::json;

PlaySession::PlaySession(std::shared_ptr<const sim::GridLayout> layout, dsl::Program program,
                         int human_chef, std::uint64_t seed, int horizon)
    : layout_(std::move(layout)),
      agent_(std::move(program), "agent"),
      human_chef_(human_chef),
      rng_(seed),
      state_(sim::reset(layout_, horizon)) {
  if (human_chef != 0 && human_chef != 1) throw std::invalid_argument("human_chef must be 0 or 1");
}

json PlaySession::tick() {
  if (done()) throw sim::SimError("episode is over");
  const auto human = pending_.value_or(sim::EnvAction::Noop);
  pending_.reset();
  const auto agent = agent_.act(state_, 1 - human_chef_, rng_).action;
  log_.push_back({state_.t, human, agent});
  score_ += human_chef_ == 0 ? sim::step_in_place(state_, human, agent)
                             : sim::step_in_place(state_, agent, human);
  return snapshot();
}

json PlaySession::snapshot() const {
  json chefs = json::array();
  for (const auto& c : state_.chefs) {
    chefs.push_back({{"x", c.pos.x},
                     {"y", c.pos.y},
                     {"facing", std::string(sim::to_string(c.facing))},
                     {"held", std::string(sim::to_string(c.held))}});
  }
  json pots = json::array();
  json counters = json::array();
  for (const auto& p : layout_->points()) {
    if (p.kind == sim::Tile::Pot) {
      const auto& pot = state_.pots[static_cast<size_t>(p.slot)];
      pots.push_back({{"x", p.pos.x},
                      {"y", p.pos.y},
                      {"onions", pot.onions},
                      {"cook_time", pot.cook_time},
                      {"ready", pot.ready()}});
    } else if (p.kind == sim::Tile::Counter) {
      const auto item = state_.counters[static_cast<size_t>(p.slot)];
      if (item != sim::Item::None) {
        counters.push_back({{"x", p.pos.x}, {"y", p.pos.y}, {"item", std::string(sim::to_string(item))}});
      }
    }
  }
  return {{"type", "state"},   {"t", state_.t},   {"horizon", state_.horizon},
          {"chefs", chefs},    {"pots", pots},    {"counters", counters},
          {"score", score_},   {"human_chef", human_chef_}};
}

json PlaySession::end_message() const { return {{"type", "end"}, {"score", score_}}; }

ReplayResult replay(std::shared_ptr<const sim::GridLayout> layout, int human_chef,
                    const std::vector<LoggedStep>& log, int horizon) {
  ReplayResult r{sim::reset(std::move(layout), horizon), 0};
  for (const auto& s : log) {
    if (s.t != r.state.t) throw sim::SimError("replay log out of order at t=" + std::to_string(s.t));
    r.score += human_chef == 0 ? sim::step_in_place(r.state, s.human, s.agent)
                               : sim::step_in_place(r.state, s.agent, s.human);
  }
  return r;
}

std::string log_to_ndjson(const std::vector<LoggedStep>& log) {
  std::ostringstream out;
  for (const auto& s : log) {
    out << json{{"t", s.t},
                {"human", std::string(sim::to_string(s.human))},
                {"agent", std::string(sim::to_string(s.agent))}}
               .dump()
        << '\n';
  }
  return out.str();
}

std::vector<LoggedStep> log_from_ndjson(std::string_view text) {
  std::vector<LoggedStep> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    const auto j = json::parse(line);
    const auto human = sim::parse_env_action(j.at("human").get<std::string>());
    const auto agent = sim::parse_env_action(j.at("agent").get<std::string>());
    if (!human || !agent) throw std::runtime_error("bad action in replay log");
    out.push_back({j.at("t").get<int>(), *human, *agent});
  }
  return out;
}

std::variant<sim::EnvAction, std::string> parse_client_message(std::string_view text) {
  const auto j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::string("message is not a JSON object");
  const auto type = j.find("type");
  if (type == j.end() || !type->is_string()) return std::string("missing message type");
  if (*type != "action") return "unknown message type '" + type->get<std::string>() + "'";
  const auto value = j.find("value");
  if (value == j.end() || !value->is_string()) return std::string("missing action value");
  const auto a = sim::parse_env_action(value->get<std::string>());
  if (!a) return "unknown action '" + value->get<std::string>() + "'";
  return *a;
}

json error_message(std::string_view what) { return {{"type", "error"}, {"message", what}}; }

json layout_json(const sim::GridLayout& layout, int human_chef, int horizon) {
  json rows = json::array();
  const auto text = layout.render();
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return {{"name", layout.name()},   {"width", layout.width()},   {"height", layout.height()},
          {"rows", rows},            {"ascii", text},             {"horizon", horizon},
          {"human_chef", human_chef}, {"cook_ticks", sim::kCookTicks}};
}

}  // namespace knowpc::play
