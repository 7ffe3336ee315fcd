#include "knowpc/rollout.hpp"

#include "knowpc/nav.hpp"

namespace knowpc::rollout {

sim::EnvAction random_env_action(Rng& rng) {
  return sim::kAllEnvActions[static_cast<size_t>(uniform_int(rng, 0, sim::kNumEnvActions - 1))];
}

Decision ProgramPolicy::act(const sim::WorldState& state, int chef, Rng& rng) {
  const auto ctx = dsl::make_context(state, chef);
  const auto choice = dsl::select_action(program_, ctx, rng);
  if (!choice.primitive) return {choice.random_action, dsl::kFallback};
  const auto target = dsl::target_class(*choice.primitive);
  if (!ctx.reach.contains(target)) return {random_env_action(rng), choice.module};
  return {nav::next_env_action(state, chef, target, rng), choice.module};
}

Decision RandomPolicy::act(const sim::WorldState&, int, Rng& rng) {
  return {random_env_action(rng), dsl::kFallback};
}

std::int64_t FiringStats::fired() const {
  std::int64_t n = 0;
  for (auto c : modules) n += c;
  return n;
}

EpisodeResult run_episode(std::shared_ptr<const sim::GridLayout> layout, Policy& chef0,
                          Policy& chef1, const EpisodeConfig& cfg, Rng& rng,
                          extractor::TransitionBuffer* buffer) {
  EpisodeResult result;
  auto state = sim::reset(std::move(layout), cfg.horizon);
  std::array<Policy*, 2> policies{&chef0, &chef1};
  while (!state.terminal()) {
    std::array<sim::EnvAction, 2> actions{};
    for (int c = 0; c < 2; ++c) {
      auto& stats = result.firing[static_cast<size_t>(c)];
      if (cfg.epsilon > 0.0 && uniform_real(rng) < cfg.epsilon) {
        actions[static_cast<size_t>(c)] = random_env_action(rng);
        ++stats.explored;
        continue;
      }
      const auto d = policies[static_cast<size_t>(c)]->act(state, c, rng);
      actions[static_cast<size_t>(c)] = d.action;
      if (d.module == dsl::kFallback) {
        ++stats.fallback;
      } else {
        if (stats.modules.size() <= static_cast<size_t>(d.module)) {
          stats.modules.resize(static_cast<size_t>(d.module) + 1, 0);
        }
        ++stats.modules[static_cast<size_t>(d.module)];
      }
    }
    if (buffer) {
      const auto before = state;
      const int r = sim::step_in_place(state, actions[0], actions[1]);
      buffer->add_step(before, state, actions[0], actions[1]);
      result.reward += r;
    } else {
      result.reward += sim::step_in_place(state, actions[0], actions[1]);
    }
  }
  result.deliveries = result.reward / sim::kDeliveryReward;
  result.final_state = std::move(state);
  return result;
}

}  // namespace knowpc::rollout
