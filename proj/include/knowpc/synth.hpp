#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "knowpc/dsl.hpp"
#include "knowpc/extractor.hpp"
#include "knowpc/random.hpp"
#include "knowpc/reasoner.hpp"
#include "knowpc/sim.hpp"

// Genetic search over precondition-constrained programs: selection and
// crossover only, then Pareto filtering and cross-evaluation.
namespace knowpc::synth {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GAConfig {
  int iterations = 50;
  int init_population = 200;
  int population = 10;
  int offspring = 30;  // children per iteration
  int episodes_per_eval = 5;
  int final_episodes = 10;
  double epsilon = 0.3;
  int max_modules = 8;
  int max_extra_conditions = 2;
  int refresh_every = 5;   // 0 disables the extractor/reasoner refresh
  int immigrants = 30;     // fresh programs injected after a refresh
  int bootstrap_episodes = 250;
  double delta = 0.1;
  std::int64_t min_support = 5;
  int cross_eval_top = 10;  // best-by-train-reward candidates added to the front
  int cross_eval_episodes = 2;  // per role and partner
  int horizon = sim::kDefaultHorizon;
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
};

// `key = value` lines; `#` starts a comment. Unknown keys are errors.
std::string render_config(const GAConfig& cfg);
GAConfig parse_config(std::string_view text, GAConfig base = {});
GAConfig load_config(const std::filesystem::path& path, GAConfig base = {});

struct Candidate {
  dsl::Program program;
  double train_reward = 0.0;
  int complexity = 0;
  std::optional<double> eval_reward;
  int id = 0;          // discovery order
  int generation = 0;  // 0 = initial population
};

// With a non-empty table every module starts from its action's full
// precondition set plus up to max_extra_conditions compatible literals. With
// an empty table actions are uniform and each module gets 1-4 random
// consistent literals.
dsl::Program random_program(const reasoner::PreconditionTable& table, const GAConfig& cfg,
                            Rng& rng);

// child = p1[..i) ++ p2[j..), clipped to max_modules. Requires 1 <= i <= |p1|
// and 0 <= j <= |p2|.
dsl::Program crossover_at(const dsl::Program& p1, const dsl::Program& p2, size_t i, size_t j,
                          int max_modules);
dsl::Program crossover(const dsl::Program& p1, const dsl::Program& p2, int max_modules, Rng& rng);

// Every module's conjunction contains its action's table entry.
bool complies(const dsl::Program& p, const reasoner::PreconditionTable& table);

// Mean self-play reward over cfg.episodes_per_eval epsilon-greedy episodes.
double evaluate(const dsl::Program& program, std::shared_ptr<const sim::GridLayout> layout,
                const GAConfig& cfg, Rng& rng, extractor::TransitionBuffer* buffer);

// Called every refresh_every iterations with the grown buffer; returns the
// table used from then on.
using RefreshFn = std::function<reasoner::PreconditionTable(const extractor::TransitionBuffer&)>;

struct SearchResult {
  std::vector<Candidate> archive;          // every distinct evaluated program
  std::vector<double> best_per_iteration;  // index 0 = initial population
  reasoner::PreconditionTable table;       // table in force at the end
  int refreshes = 0;
};

SearchResult ga_search(std::shared_ptr<const sim::GridLayout> layout,
                       reasoner::PreconditionTable table, const GAConfig& cfg,
                       extractor::TransitionBuffer& buffer, const RefreshFn& refresh = {});

// Selection order: higher train reward, then lower complexity, then earlier.
bool better(const Candidate& a, const Candidate& b);

// Non-dominated under (max train_reward, min complexity).
std::vector<Candidate> pareto_front(const std::vector<Candidate>& candidates);

// Mean reward of `a` paired with `b` over both role assignments at epsilon 0.
double pair_reward(const dsl::Program& a, const dsl::Program& b,
                   std::shared_ptr<const sim::GridLayout> layout, int episodes_per_role,
                   int horizon, std::uint64_t seed);

// Sets eval_reward (sum over front partners) on every candidate and returns
// the best; ties go to lower complexity.
Candidate cross_evaluate(std::vector<Candidate>& candidates, const std::vector<Candidate>& front,
                         std::shared_ptr<const sim::GridLayout> layout, const GAConfig& cfg);

// Front plus the top cfg.cross_eval_top archive members, without duplicates.
std::vector<Candidate> cross_eval_pool(const std::vector<Candidate>& archive,
                                       const std::vector<Candidate>& front, const GAConfig& cfg);

// Size of the program space: conjunctions of 1..max_per_module distinct
// conditions, each optionally negated, times the action choices, over a fixed
// number of modules.
boost::multiprecision::cpp_int conjunction_count(int conditions, int max_per_module);
boost::multiprecision::cpp_int program_count(int actions, int conditions, int max_per_module,
                                             int modules);

}  // namespace knowpc::synth
