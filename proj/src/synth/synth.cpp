#include "knowpc/synth.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "knowpc/rollout.hpp"

namespace knowpc::synth {

using dsl::Literal;
using dsl::Program;

// ---- config ----

void GAConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string(name) + " must be >= 1");
  };
  positive(iterations, "iterations");
  positive(init_population, "init_population");
  positive(population, "population");
  positive(offspring, "offspring");
  positive(episodes_per_eval, "episodes_per_eval");
  positive(final_episodes, "final_episodes");
  positive(max_modules, "max_modules");
  positive(horizon, "horizon");
  positive(threads, "threads");
  positive(cross_eval_episodes, "cross_eval_episodes");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("epsilon must be in [0, 1]");
  if (delta < 0.0) throw ConfigError("delta must be >= 0");
  if (max_extra_conditions < 0 || refresh_every < 0 || immigrants < 0 ||
      bootstrap_episodes < 0 || cross_eval_top < 0 || min_support < 0) {
    throw ConfigError("negative count in config");
  }
}

namespace {

template <typename F>
void for_each_field(GAConfig& c, F&& f) {
  f("iterations", c.iterations);
  f("init_population", c.init_population);
  f("population", c.population);
  f("offspring", c.offspring);
  f("episodes_per_eval", c.episodes_per_eval);
  f("final_episodes", c.final_episodes);
  f("epsilon", c.epsilon);
  f("max_modules", c.max_modules);
  f("max_extra_conditions", c.max_extra_conditions);
  f("refresh_every", c.refresh_every);
  f("immigrants", c.immigrants);
  f("bootstrap_episodes", c.bootstrap_episodes);
  f("delta", c.delta);
  f("min_support", c.min_support);
  f("cross_eval_top", c.cross_eval_top);
  f("cross_eval_episodes", c.cross_eval_episodes);
  f("horizon", c.horizon);
  f("seed", c.seed);
  f("threads", c.threads);
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  return s.substr(first, s.find_last_not_of(" \t\r") - first + 1);
}

template <typename T>
void parse_value(std::string_view text, T& out, const std::string& key) {
  if constexpr (std::is_same_v<T, double>) {
    try {
      size_t used = 0;
      const double v = std::stod(std::string(text), &used);
      if (used != text.size()) throw std::invalid_argument("trailing");
      out = v;
    } catch (const std::exception&) {
      throw ConfigError("bad value for " + key + ": '" + std::string(text) + "'");
    }
  } else {
    T v{};
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size()) {
      throw ConfigError("bad value for " + key + ": '" + std::string(text) + "'");
    }
    out = v;
  }
}

}  // namespace

std::string render_config(const GAConfig& cfg) {
  GAConfig copy = cfg;
  std::ostringstream out;
  for_each_field(copy, [&](const char* key, const auto& value) {
    out << key << " = " << value << '\n';
  });
  return out.str();
}

GAConfig parse_config(std::string_view text, GAConfig base) {
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key(trim(view.substr(0, eq)));
    const auto value = trim(view.substr(eq + 1));
    bool known = false;
    for_each_field(base, [&](const char* name, auto& field) {
      if (key == name) {
        parse_value(value, field, key);
        known = true;
      }
    });
    if (!known) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  base.validate();
  return base;
}

GAConfig load_config(const std::filesystem::path& path, GAConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), base);
}

// ---- program generation ----

namespace {

Literal random_literal(Rng& rng) {
  return {static_cast<dsl::Condition>(uniform_int(rng, 0, dsl::kNumConditions - 1)),
          uniform_int(rng, 0, 1) == 1};
}

void add_random_literals(std::vector<Literal>& conds, int count, Rng& rng) {
  constexpr int kAttempts = 32;
  for (int added = 0, tries = 0; added < count && tries < kAttempts; ++tries) {
    const auto lit = random_literal(rng);
    if (!dsl::compatible(conds, lit)) continue;
    conds.push_back(lit);
    ++added;
  }
}

}  // namespace

Program random_program(const reasoner::PreconditionTable& table, const GAConfig& cfg, Rng& rng) {
  const int k = uniform_int(rng, 1, cfg.max_modules);
  const auto actions = table.primitives();
  std::vector<dsl::ITModule> modules;
  modules.reserve(static_cast<size_t>(k));
  for (int m = 0; m < k; ++m) {
    dsl::ITModule module;
    if (actions.empty()) {
      module.action = static_cast<dsl::ActionPrimitive>(uniform_int(rng, 0, dsl::kNumActionPrimitives - 1));
      add_random_literals(module.conditions, uniform_int(rng, 1, 4), rng);
    } else {
      module.action = actions[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(actions.size()) - 1))];
      module.conditions = table.at(module.action);
      // An empty entry still needs one condition to form a module.
      const int min_extra = module.conditions.empty() ? 1 : 0;
      add_random_literals(module.conditions,
                          uniform_int(rng, min_extra, std::max(min_extra, cfg.max_extra_conditions)), rng);
    }
    modules.push_back(std::move(module));
  }
  return Program(std::move(modules));
}

Program crossover_at(const Program& p1, const Program& p2, size_t i, size_t j, int max_modules) {
  if (i < 1 || i > p1.size() || j > p2.size()) throw std::out_of_range("crossover point");
  std::vector<dsl::ITModule> child(p1.modules().begin(), p1.modules().begin() + static_cast<std::ptrdiff_t>(i));
  child.insert(child.end(), p2.modules().begin() + static_cast<std::ptrdiff_t>(j), p2.modules().end());
  if (child.size() > static_cast<size_t>(max_modules)) child.resize(static_cast<size_t>(max_modules));
  return Program(std::move(child));
}

Program crossover(const Program& p1, const Program& p2, int max_modules, Rng& rng) {
  const auto i = static_cast<size_t>(uniform_int(rng, 1, static_cast<int>(p1.size())));
  const auto j = static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(p2.size())));
  return crossover_at(p1, p2, i, j, max_modules);
}

bool complies(const Program& p, const reasoner::PreconditionTable& table) {
  for (const auto& m : p.modules()) {
    if (!table.has(m.action)) return false;
    for (const auto& lit : table.at(m.action)) {
      if (std::find(m.conditions.begin(), m.conditions.end(), lit) == m.conditions.end()) return false;
    }
  }
  return true;
}

double evaluate(const Program& program, std::shared_ptr<const sim::GridLayout> layout,
                const GAConfig& cfg, Rng& rng, extractor::TransitionBuffer* buffer) {
  rollout::ProgramPolicy policy(program);
  const rollout::EpisodeConfig ep{cfg.epsilon, cfg.horizon};
  double total = 0.0;
  for (int e = 0; e < cfg.episodes_per_eval; ++e) {
    total += rollout::run_episode(layout, policy, policy, ep, rng, buffer).reward;
  }
  return total / cfg.episodes_per_eval;
}

// ---- search ----

bool better(const Candidate& a, const Candidate& b) {
  if (a.train_reward != b.train_reward) return a.train_reward > b.train_reward;
  if (a.complexity != b.complexity) return a.complexity < b.complexity;
  return a.id < b.id;
}

namespace {

// Runs fn(i) for i in [0, n) on up to `threads` workers.
template <typename F>
void parallel_for(size_t n, int threads, F&& fn) {
  if (threads <= 1 || n <= 1) {
    for (size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  {
    std::vector<std::jthread> workers;
    const size_t count = std::min(n, static_cast<size_t>(threads));
    for (size_t w = 0; w < count; ++w) {
      workers.emplace_back([&] {
        for (size_t i = next++; i < n; i = next++) {
          try {
            fn(i);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
  }
  if (error) std::rethrow_exception(error);
}

constexpr std::uint64_t kStreamSearch = 1;
constexpr std::uint64_t kStreamEval = 2;
constexpr std::uint64_t kStreamCross = 3;

class Search {
 public:
  Search(std::shared_ptr<const sim::GridLayout> layout, const GAConfig& cfg,
         extractor::TransitionBuffer& buffer)
      : layout_(std::move(layout)), cfg_(cfg), buffer_(buffer),
        rng_(derive_seed(cfg.seed, {kStreamSearch})) {}

  // Fresh programs not yet in the archive.
  std::vector<Program> draw_random(const reasoner::PreconditionTable& table, int count) {
    std::vector<Program> out;
    std::set<std::string> batch;
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < count * 20; ++tries) {
      auto p = random_program(table, cfg_, rng_);
      auto text = dsl::render_program(p);
      if (seen_.contains(text) || !batch.insert(std::move(text)).second) continue;
      out.push_back(std::move(p));
    }
    return out;
  }

  std::vector<Program> draw_children(const std::vector<Candidate>& parents, int count,
                                     std::set<std::string>& batch) {
    std::vector<Program> out;
    const int n = static_cast<int>(parents.size());
    for (int tries = 0; static_cast<int>(out.size()) < count && tries < count * 20; ++tries) {
      const auto& a = parents[static_cast<size_t>(uniform_int(rng_, 0, n - 1))];
      const auto& b = parents[static_cast<size_t>(uniform_int(rng_, 0, n - 1))];
      auto child = crossover(a.program, b.program, cfg_.max_modules, rng_);
      auto text = dsl::render_program(child);
      if (seen_.contains(text) || !batch.insert(std::move(text)).second) continue;
      out.push_back(std::move(child));
    }
    return out;
  }

  void evaluate_batch(std::vector<Program> programs, int generation) {
    const size_t n = programs.size();
    std::vector<double> rewards(n);
    std::vector<extractor::TransitionBuffer> local(n);
    parallel_for(n, cfg_.threads, [&](size_t i) {
      Rng rng(derive_seed(cfg_.seed, {kStreamEval, static_cast<std::uint64_t>(generation), i}));
      rewards[i] = evaluate(programs[i], layout_, cfg_, rng, &local[i]);
    });
    for (size_t i = 0; i < n; ++i) {
      buffer_.merge(local[i]);
      Candidate c;
      c.complexity = programs[i].complexity();
      c.train_reward = rewards[i];
      c.id = static_cast<int>(archive_.size());
      c.generation = generation;
      seen_.insert(dsl::render_program(programs[i]));
      c.program = std::move(programs[i]);
      archive_.push_back(std::move(c));
    }
  }

  std::vector<Candidate> top(int k) const {
    std::vector<Candidate> sorted = archive_;
    const auto keep = std::min(sorted.size(), static_cast<size_t>(k));
    std::partial_sort(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(keep), sorted.end(), better);
    sorted.resize(keep);
    return sorted;
  }

  double best_reward() const {
    double best = 0.0;
    for (const auto& c : archive_) best = std::max(best, c.train_reward);
    return best;
  }

  std::vector<Candidate>& archive() { return archive_; }

 private:
  std::shared_ptr<const sim::GridLayout> layout_;
  const GAConfig& cfg_;
  extractor::TransitionBuffer& buffer_;
  Rng rng_;
  std::vector<Candidate> archive_;
  std::set<std::string> seen_;
};

}  // namespace

SearchResult ga_search(std::shared_ptr<const sim::GridLayout> layout,
                       reasoner::PreconditionTable table, const GAConfig& cfg,
                       extractor::TransitionBuffer& buffer, const RefreshFn& refresh) {
  cfg.validate();
  Search search(layout, cfg, buffer);
  SearchResult result;
  search.evaluate_batch(search.draw_random(table, cfg.init_population), 0);
  result.best_per_iteration.push_back(search.best_reward());

  for (int it = 1; it <= cfg.iterations; ++it) {
    std::vector<Program> batch;
    std::set<std::string> texts;
    if (refresh && cfg.refresh_every > 0 && it % cfg.refresh_every == 0) {
      table = refresh(buffer);
      ++result.refreshes;
      batch = search.draw_random(table, cfg.immigrants);
      for (const auto& p : batch) texts.insert(dsl::render_program(p));
    }
    auto children = search.draw_children(search.top(cfg.population), cfg.offspring, texts);
    std::move(children.begin(), children.end(), std::back_inserter(batch));
    search.evaluate_batch(std::move(batch), it);
    result.best_per_iteration.push_back(search.best_reward());
  }
  result.archive = std::move(search.archive());
  result.table = std::move(table);
  return result;
}

std::vector<Candidate> pareto_front(const std::vector<Candidate>& candidates) {
  std::vector<const Candidate*> order;
  for (const auto& c : candidates) order.push_back(&c);
  std::sort(order.begin(), order.end(), [](const Candidate* a, const Candidate* b) {
    if (a->train_reward != b->train_reward) return a->train_reward > b->train_reward;
    if (a->complexity != b->complexity) return a->complexity < b->complexity;
    return a->id < b->id;
  });
  std::vector<Candidate> front;
  int best_complexity = std::numeric_limits<int>::max();  // over strictly higher rewards
  size_t i = 0;
  while (i < order.size()) {
    const double reward = order[i]->train_reward;
    const int group_min = order[i]->complexity;
    size_t j = i;
    for (; j < order.size() && order[j]->train_reward == reward; ++j) {
      if (order[j]->complexity == group_min && group_min < best_complexity) front.push_back(*order[j]);
    }
    best_complexity = std::min(best_complexity, group_min);
    i = j;
  }
  return front;
}

double pair_reward(const Program& a, const Program& b, std::shared_ptr<const sim::GridLayout> layout,
                   int episodes_per_role, int horizon, std::uint64_t seed) {
  rollout::ProgramPolicy pa(a);
  rollout::ProgramPolicy pb(b);
  const rollout::EpisodeConfig ep{0.0, horizon};
  double total = 0.0;
  for (std::uint64_t role = 0; role < 2; ++role) {
    for (int e = 0; e < episodes_per_role; ++e) {
      Rng rng(derive_seed(seed, {role, static_cast<std::uint64_t>(e)}));
      total += role == 0 ? rollout::run_episode(layout, pa, pb, ep, rng).reward
                         : rollout::run_episode(layout, pb, pa, ep, rng).reward;
    }
  }
  return total / (2.0 * episodes_per_role);
}

std::vector<Candidate> cross_eval_pool(const std::vector<Candidate>& archive,
                                       const std::vector<Candidate>& front, const GAConfig& cfg) {
  std::vector<Candidate> pool = front;
  std::set<int> ids;
  for (const auto& c : front) ids.insert(c.id);
  std::vector<Candidate> sorted = archive;
  std::sort(sorted.begin(), sorted.end(), better);
  for (size_t i = 0; i < sorted.size() && i < static_cast<size_t>(cfg.cross_eval_top); ++i) {
    if (ids.insert(sorted[i].id).second) pool.push_back(sorted[i]);
  }
  return pool;
}

Candidate cross_evaluate(std::vector<Candidate>& candidates, const std::vector<Candidate>& front,
                         std::shared_ptr<const sim::GridLayout> layout, const GAConfig& cfg) {
  if (front.empty()) throw std::invalid_argument("cross_evaluate needs a non-empty front");
  if (candidates.empty()) throw std::invalid_argument("cross_evaluate needs candidates");
  parallel_for(candidates.size(), cfg.threads, [&](size_t ci) {
    auto& c = candidates[ci];
    double sum = 0.0;
    for (const auto& f : front) {
      const auto seed = derive_seed(cfg.seed, {kStreamCross, static_cast<std::uint64_t>(c.id),
                                               static_cast<std::uint64_t>(f.id)});
      sum += pair_reward(c.program, f.program, layout, cfg.cross_eval_episodes, cfg.horizon, seed);
    }
    c.eval_reward = sum;
  });
  const Candidate* best = &candidates.front();
  for (const auto& c : candidates) {
    if (*c.eval_reward > *best->eval_reward ||
        (*c.eval_reward == *best->eval_reward &&
         (c.complexity < best->complexity ||
          (c.complexity == best->complexity && c.id < best->id)))) {
      best = &c;
    }
  }
  return *best;
}

// ---- search space ----

boost::multiprecision::cpp_int conjunction_count(int conditions, int max_per_module) {
  using boost::multiprecision::cpp_int;
  cpp_int total = 0;
  cpp_int choose = 1;  // C(conditions, i)
  cpp_int signs = 1;   // 2^i
  for (int i = 1; i <= max_per_module && i <= conditions; ++i) {
    choose = choose * (conditions - i + 1) / i;
    signs *= 2;
    total += choose * signs;
  }
  return total;
}

boost::multiprecision::cpp_int program_count(int actions, int conditions, int max_per_module,
                                             int modules) {
  boost::multiprecision::cpp_int per_module = conjunction_count(conditions, max_per_module) * actions;
  return boost::multiprecision::pow(per_module, static_cast<unsigned>(modules));
}

}  // namespace knowpc::synth
