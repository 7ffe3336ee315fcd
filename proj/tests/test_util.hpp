#pragma once

#include <fstream>
#include <initializer_list>
#include <memory>
#include <sstream>
#include <string>
#include <utility>

#include "knowpc/sim.hpp"

namespace knowpc::test {

inline std::string source_path(const std::string& rel) {
  return std::string(KNOWPC_SOURCE_DIR) + "/" + rel;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("missing test file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::shared_ptr<const sim::GridLayout> layout(const std::string& name) {
  return std::make_shared<const sim::GridLayout>(
      sim::GridLayout::load_file(source_path("layouts/" + name + ".layout")));
}

inline std::shared_ptr<const sim::GridLayout> inline_layout(std::string_view text,
                                                           std::string name = "inline") {
  return std::make_shared<const sim::GridLayout>(sim::GridLayout::parse(text, std::move(name)));
}

using Joint = std::pair<sim::EnvAction, sim::EnvAction>;

// Applies joint actions in order and returns the summed reward.
inline int play(sim::WorldState& s, std::initializer_list<Joint> steps) {
  int r = 0;
  for (const auto& [a, b] : steps) r += sim::step_in_place(s, a, b);
  return r;
}

}  // namespace knowpc::test
