#include "knowpc/harness.hpp"

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json.hpp"

#ifndef KNOWPC_LAYOUTS_DIR
#define KNOWPC_LAYOUTS_DIR "layouts"
#endif

namespace knowpc::harness {

namespace fs = std::filesystem;

fs::path default_layouts_dir() {
  if (const char* env = std::getenv("KNOWPC_LAYOUTS")) return env;
  return KNOWPC_LAYOUTS_DIR;
}

std::shared_ptr<const sim::GridLayout> load_layout(const std::string& name_or_path,
                                                   const fs::path& layouts_dir) {
  fs::path path = name_or_path;
  if (!fs::is_regular_file(path)) path = layouts_dir / (name_or_path + ".layout");
  if (!fs::is_regular_file(path)) throw HarnessError("unknown layout '" + name_or_path + "'");
  return std::make_shared<const sim::GridLayout>(sim::GridLayout::load_file(path));
}

namespace {

constexpr std::uint64_t kStreamBootstrap = 10;
constexpr std::uint64_t kStreamFinal = 11;
constexpr std::uint64_t kStreamMatrix = 12;
constexpr std::uint64_t kStreamProbe = 13;

extractor::ExtractorConfig extractor_config(const synth::GAConfig& cfg) {
  return {cfg.delta, cfg.min_support};
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw HarnessError("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw HarnessError("missing artifact " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double v) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << v;
  return out.str();
}

}  // namespace

TrainResult train(const TrainOptions& options) {
  const auto& cfg = options.cfg;
  cfg.validate();
  if (!options.layout) throw HarnessError("no layout");
  TrainResult r;

  Rng boot(derive_seed(cfg.seed, {kStreamBootstrap}));
  rollout::RandomPolicy random;
  const rollout::EpisodeConfig explore{1.0, cfg.horizon};
  for (int e = 0; e < cfg.bootstrap_episodes; ++e) {
    rollout::run_episode(options.layout, random, random, explore, boot, &r.buffer);
  }

  const auto ecfg = extractor_config(cfg);
  r.initial_rules = extractor::extract_rules(r.buffer, ecfg);
  r.initial_table = reasoner::infer_preconditions(r.initial_rules, options.mode);
  if (options.mode != reasoner::Mode::Disabled && r.initial_table.empty()) {
    throw HarnessError("reasoner produced no preconditions; bootstrap found no rules");
  }
  r.rules = r.initial_rules;

  synth::RefreshFn refresh;
  if (options.mode != reasoner::Mode::Disabled) {
    refresh = [&](const extractor::TransitionBuffer& buffer) {
      r.rules = extractor::extract_rules(buffer, ecfg);
      auto table = reasoner::infer_preconditions(r.rules, options.mode);
      return table.empty() ? r.initial_table : table;
    };
  }
  r.search = synth::ga_search(options.layout, r.initial_table, cfg, r.buffer, refresh);
  r.table = r.search.table;

  r.front = synth::pareto_front(r.search.archive);
  r.pool = synth::cross_eval_pool(r.search.archive, r.front, cfg);
  r.best = synth::cross_evaluate(r.pool, r.front, options.layout, cfg);

  rollout::ProgramPolicy best(r.best.program);
  const rollout::EpisodeConfig greedy{0.0, cfg.horizon};
  double total = 0.0;
  for (int e = 0; e < cfg.final_episodes; ++e) {
    Rng rng(derive_seed(cfg.seed, {kStreamFinal, static_cast<std::uint64_t>(e)}));
    const int reward = rollout::run_episode(options.layout, best, best, greedy, rng).reward;
    r.final_rewards.push_back(reward);
    total += reward;
  }
  r.final_reward = total / cfg.final_episodes;

  if (options.out_dir) write_artifacts(*options.out_dir, options, r);
  return r;
}

void write_artifacts(const fs::path& dir, const TrainOptions& options, const TrainResult& r) {
  fs::create_directories(dir);
  write_text(dir / "config.txt", "# mode = " + std::string(reasoner::to_string(options.mode)) +
                                     "\n# layout = " + options.layout->name() + "\n" +
                                     synth::render_config(options.cfg));
  write_text(dir / "layout.layout", options.layout->render());
  write_text(dir / "rules_initial.txt", extractor::render_rules(r.initial_rules));
  write_text(dir / "rules.txt", extractor::render_rules(r.rules));
  write_text(dir / "preconditions_initial.txt", reasoner::render_table(r.initial_table));
  write_text(dir / "preconditions.txt", reasoner::render_table(r.table));
  write_text(dir / "graph.dot", reasoner::TransitionGraph::build(r.rules).to_dot());
  r.buffer.save(dir / "buffer.ndjson");

  std::ostringstream archive;
  for (const auto& c : r.search.archive) {
    nlohmann::json j;
    j["id"] = c.id;
    j["generation"] = c.generation;
    j["train_reward"] = c.train_reward;
    j["complexity"] = c.complexity;
    j["program"] = dsl::render_program(c.program);
    archive << j.dump() << '\n';
  }
  write_text(dir / "archive.jsonl", archive.str());

  std::ostringstream pareto;
  pareto << "id,train_reward,complexity,eval_reward,on_front\n";
  for (const auto& c : r.pool) {
    const bool on_front = std::any_of(r.front.begin(), r.front.end(),
                                      [&](const synth::Candidate& f) { return f.id == c.id; });
    pareto << c.id << ',' << c.train_reward << ',' << c.complexity << ','
           << (c.eval_reward ? fmt(*c.eval_reward) : "") << ',' << (on_front ? 1 : 0) << '\n';
  }
  write_text(dir / "pareto.csv", pareto.str());

  std::ostringstream curve;
  curve << "iteration,best_train_reward\n";
  for (size_t i = 0; i < r.search.best_per_iteration.size(); ++i) {
    curve << i << ',' << r.search.best_per_iteration[i] << '\n';
  }
  write_text(dir / "progress.csv", curve.str());

  write_text(dir / "best.ktp", dsl::render_program(r.best.program));

  std::ostringstream summary;
  summary << "layout " << options.layout->name() << '\n'
          << "mode " << reasoner::to_string(options.mode) << '\n'
          << "seed " << options.cfg.seed << '\n'
          << "archive " << r.search.archive.size() << '\n'
          << "front " << r.front.size() << '\n'
          << "best_id " << r.best.id << '\n'
          << "best_complexity " << r.best.complexity << '\n'
          << "best_train_reward " << fmt(r.best.train_reward) << '\n'
          << "final_reward " << fmt(r.final_reward) << '\n'
          << "final_episodes";
  for (int v : r.final_rewards) summary << ' ' << v;
  summary << '\n';
  write_text(dir / "summary.txt", summary.str());
}

// ---- matrices ----

Entrant program_entrant(std::string name, dsl::Program program) {
  auto shared = std::make_shared<const dsl::Program>(std::move(program));
  return {name, [shared, name] { return std::make_unique<rollout::ProgramPolicy>(*shared, name); }};
}

Entrant resolve_entrant(const std::string& spec) {
  if (spec == "bot:random") return {spec, [] { return std::make_unique<rollout::RandomPolicy>(); }};
  if (spec == "bot:idle") return {spec, [] { return std::make_unique<rollout::IdlePolicy>(); }};
  if (spec.starts_with("bot:")) throw HarnessError("unknown bot '" + spec + "'");
  return program_entrant(spec, dsl::load_program(spec));
}

std::vector<std::vector<double>> RewardMatrix::normalized() const {
  double top = 0.0;
  for (size_t i = 0; i < mean.size(); ++i) top = std::max(top, mean[i][i]);
  auto out = mean;
  if (top <= 0.0) return out;
  for (auto& row : out) {
    for (auto& v : row) v /= top;
  }
  return out;
}

RewardMatrix eval_matrix(const std::vector<Entrant>& entrants,
                         std::shared_ptr<const sim::GridLayout> layout, int episodes,
                         std::uint64_t seed, int horizon) {
  if (episodes < 1) throw HarnessError("episodes must be >= 1");
  RewardMatrix m;
  m.layout = layout->name();
  const size_t n = entrants.size();
  m.mean.assign(n, std::vector<double>(n, 0.0));
  for (const auto& e : entrants) m.names.push_back(e.name);
  const rollout::EpisodeConfig greedy{0.0, horizon};
  for (size_t i = 0; i < n; ++i) {
    for (size_t j = i; j < n; ++j) {
      auto a = entrants[i].make();
      auto b = entrants[j].make();
      double total = 0.0;
      for (std::uint64_t role = 0; role < 2; ++role) {
        for (int e = 0; e < episodes; ++e) {
          Rng rng(derive_seed(seed, {kStreamMatrix, i, j, role, static_cast<std::uint64_t>(e)}));
          total += role == 0 ? rollout::run_episode(layout, *a, *b, greedy, rng).reward
                             : rollout::run_episode(layout, *b, *a, greedy, rng).reward;
        }
      }
      m.mean[i][j] = m.mean[j][i] = total / (2.0 * episodes);
    }
  }
  return m;
}

std::string matrix_csv(const RewardMatrix& m, bool normalized) {
  const auto values = normalized ? m.normalized() : m.mean;
  std::ostringstream out;
  out << m.layout;
  for (const auto& n : m.names) out << ',' << n;
  out << '\n';
  for (size_t i = 0; i < values.size(); ++i) {
    out << m.names[i];
    for (double v : values[i]) out << ',' << (normalized ? std::to_string(v) : fmt(v));
    out << '\n';
  }
  return out.str();
}

// ---- inspect ----

void inspect(const fs::path& dir, std::ostream& out) {
  if (!fs::is_directory(dir)) throw HarnessError("not an experiment directory: " + dir.string());
  const auto config_text = read_text(dir / "config.txt");
  const auto cfg = synth::parse_config(config_text);
  const auto layout = std::make_shared<const sim::GridLayout>(
      sim::GridLayout::parse(read_text(dir / "layout.layout"), "experiment"));
  const auto program = dsl::parse_program(read_text(dir / "best.ktp"));
  const auto table_text = read_text(dir / "preconditions.txt");
  const auto dot = read_text(dir / "graph.dot");
  const auto pareto = read_text(dir / "pareto.csv");
  const auto summary = read_text(dir / "summary.txt");

  out << "== summary\n" << summary;
  out << "== preconditions\n" << table_text;
  size_t nodes = 0;
  size_t edges = 0;
  std::istringstream dot_lines(dot);
  for (std::string line; std::getline(dot_lines, line);) {
    if (line.find("->") != std::string::npos) {
      ++edges;
    } else if (line.find("[label=") != std::string::npos) {
      ++nodes;
    }
  }
  out << "== transition graph\n" << nodes << " nodes, " << edges << " edges (graph.dot)\n";
  out << "== pareto front and cross-evaluation\n" << pareto;
  out << "== best program\n" << dsl::render_program(program);

  rollout::ProgramPolicy policy(program);
  Rng rng(derive_seed(cfg.seed, {kStreamProbe}));
  const auto probe = rollout::run_episode(layout, policy, policy, {0.0, cfg.horizon}, rng);
  out << "== probe episode (epsilon 0, chef 0)\n";
  out << "reward " << probe.reward << '\n';
  const auto& stats = probe.firing[0];
  for (size_t m = 0; m < program.size(); ++m) {
    const auto fired = m < stats.modules.size() ? stats.modules[m] : 0;
    out << "module " << (m + 1) << ' ' << dsl::to_string(program.modules()[m].action) << ' '
        << fired << '\n';
  }
  out << "fallback " << stats.fallback << '\n';
}

}  // namespace knowpc::harness
