#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "knowpc/dsl.hpp"
#include "knowpc/extractor.hpp"
#include "knowpc/random.hpp"
#include "knowpc/sim.hpp"

// Policies and the episode runner shared by training, evaluation and the play
// server.
namespace knowpc::rollout {

struct Decision {
  sim::EnvAction action = sim::EnvAction::Noop;
  int module = dsl::kFallback;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual Decision act(const sim::WorldState& state, int chef, Rng& rng) = 0;
  virtual std::string name() const = 0;
};

// Runs a program; a fired primitive whose target is unreachable degrades to a
// random action.
class ProgramPolicy : public Policy {
 public:
  explicit ProgramPolicy(dsl::Program program, std::string name = "program")
      : program_(std::move(program)), name_(std::move(name)) {}
  Decision act(const sim::WorldState& state, int chef, Rng& rng) override;
  std::string name() const override { return name_; }
  const dsl::Program& program() const { return program_; }

 private:
  dsl::Program program_;
  std::string name_;
};

class RandomPolicy : public Policy {
 public:
  Decision act(const sim::WorldState& state, int chef, Rng& rng) override;
  std::string name() const override { return "bot:random"; }
};

class IdlePolicy : public Policy {
 public:
  Decision act(const sim::WorldState&, int, Rng&) override { return {}; }
  std::string name() const override { return "bot:idle"; }
};

// Per-chef count of which module chose each action. Exploration steps
// (epsilon) are counted apart from the program's own random fallback.
struct FiringStats {
  std::vector<std::int64_t> modules;
  std::int64_t fallback = 0;
  std::int64_t explored = 0;

  std::int64_t fired() const;
};

struct EpisodeConfig {
  double epsilon = 0.0;
  int horizon = sim::kDefaultHorizon;
};

struct EpisodeResult {
  int reward = 0;
  int deliveries = 0;
  std::array<FiringStats, 2> firing;
  sim::WorldState final_state;
};

// Each chef, each step: with probability epsilon a uniform random action,
// otherwise its policy's. Steps are appended to `buffer` when given.
EpisodeResult run_episode(std::shared_ptr<const sim::GridLayout> layout, Policy& chef0,
                          Policy& chef1, const EpisodeConfig& cfg, Rng& rng,
                          extractor::TransitionBuffer* buffer = nullptr);

sim::EnvAction random_env_action(Rng& rng);

}  // namespace knowpc::rollout
