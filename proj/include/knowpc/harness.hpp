#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "knowpc/extractor.hpp"
#include "knowpc/reasoner.hpp"
#include "knowpc/rollout.hpp"
#include "knowpc/synth.hpp"

// Training pipeline, cross-play matrices and artifact inspection.
namespace knowpc::harness {

class HarnessError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Directory holding the bundled `<name>.layout` files.
std::filesystem::path default_layouts_dir();

// An existing file path is loaded as is; anything else is looked up as
// `<layouts_dir>/<name>.layout`.
std::shared_ptr<const sim::GridLayout> load_layout(const std::string& name_or_path,
                                                   const std::filesystem::path& layouts_dir = default_layouts_dir());

struct TrainOptions {
  std::shared_ptr<const sim::GridLayout> layout;
  reasoner::Mode mode = reasoner::Mode::Full;
  synth::GAConfig cfg;
  std::optional<std::filesystem::path> out_dir;
};

struct TrainResult {
  extractor::RuleSets initial_rules;
  reasoner::PreconditionTable initial_table;
  extractor::RuleSets rules;  // after the last refresh
  reasoner::PreconditionTable table;
  synth::SearchResult search;
  std::vector<synth::Candidate> front;
  std::vector<synth::Candidate> pool;  // cross-evaluated candidates
  synth::Candidate best;
  std::vector<int> final_rewards;  // epsilon-0 self-play of `best`
  double final_reward = 0.0;
  extractor::TransitionBuffer buffer;
};

// Bootstrap, extract, reason, search, Pareto filter, cross-evaluate, final
// evaluation. Writes artifacts when out_dir is set.
TrainResult train(const TrainOptions& options);

void write_artifacts(const std::filesystem::path& dir, const TrainOptions& options,
                     const TrainResult& result);

// A matrix participant: a program file or a scripted bot (`bot:random`,
// `bot:idle`).
struct Entrant {
  std::string name;
  std::function<std::unique_ptr<rollout::Policy>()> make;
};

Entrant resolve_entrant(const std::string& spec);
Entrant program_entrant(std::string name, dsl::Program program);

struct RewardMatrix {
  std::string layout;
  std::vector<std::string> names;
  std::vector<std::vector<double>> mean;  // [i][j], role-averaged

  // Divided by the largest diagonal entry; unchanged if that is 0.
  std::vector<std::vector<double>> normalized() const;
};

// Entry (i, j): mean epsilon-0 reward of i partnered with j over both role
// assignments, `episodes` episodes per role. Computed once per unordered pair
// with shared seeds, so the matrix is symmetric.
RewardMatrix eval_matrix(const std::vector<Entrant>& entrants,
                         std::shared_ptr<const sim::GridLayout> layout, int episodes,
                         std::uint64_t seed, int horizon = sim::kDefaultHorizon);

std::string matrix_csv(const RewardMatrix& m, bool normalized = false);

// Plain-text report of an experiment directory. Throws HarnessError when
// artifacts are missing.
void inspect(const std::filesystem::path& dir, std::ostream& out);

}  // namespace knowpc::harness
