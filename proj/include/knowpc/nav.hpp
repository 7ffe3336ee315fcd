#pragma once

#include <bitset>
#include <optional>
#include <stdexcept>

#include "knowpc/random.hpp"
#include "knowpc/sim.hpp"

// BFS low-level control: reachability of interaction-point classes and the
// per-tick movement toward the nearest instance of a class.
//
// The teammate is transparent for planning (its tile is not an obstacle) but
// blocking for execution: a planned move into the teammate's tile, or into the
// floor tile the teammate is facing, becomes a random sidestep for chef 0. Chef
// 1 instead takes the first step of a detour around the blocked tiles when one
// exists.
namespace knowpc::nav {

class NavError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Reachability {
 public:
  bool contains(sim::PointClass c) const { return bits_.test(static_cast<size_t>(c)); }
  void insert(sim::PointClass c) { bits_.set(static_cast<size_t>(c)); }
  bool empty() const { return bits_.none(); }
  friend bool operator==(const Reachability&, const Reachability&) = default;

 private:
  std::bitset<sim::kNumPointClasses> bits_;
};

// Classes with at least one instance the chef can walk up to and face.
Reachability reachability(const sim::WorldState& state, int chef);
bool reachable(const sim::WorldState& state, int chef, sim::PointClass target);

struct Target {
  int point = -1;
  sim::Approach approach;
  int distance = 0;
};

// Nearest instance by BFS distance to its facing tile; ties go to the first
// point in row-major order, then to approach order up, down, left, right.
std::optional<Target> nearest_target(const sim::WorldState& state, int chef,
                                     sim::PointClass target);

// One environment action toward interacting with `target`. Throws NavError if
// no instance is reachable.
sim::EnvAction next_env_action(const sim::WorldState& state, int chef, sim::PointClass target,
                               Rng& rng);

}  // namespace knowpc::nav
