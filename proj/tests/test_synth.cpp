#include <set>

#include "doctest.h"
#include "knowpc/synth.hpp"
#include "test_util.hpp"

using namespace knowpc;
using namespace knowpc::synth;
using boost::multiprecision::cpp_int;
using dsl::ActionPrimitive;
using dsl::Condition;

namespace {

reasoner::PreconditionTable fixture_table() {
  return reasoner::parse_table(
      test::read_file(test::source_path("fixtures/cramped_room_preconditions.txt")));
}

dsl::Program prog(std::string_view text) { return dsl::parse_program(text); }

Candidate cand(int id, double reward, int complexity) {
  Candidate c;
  c.id = id;
  c.train_reward = reward;
  c.complexity = complexity;
  return c;
}

std::set<int> ids(const std::vector<Candidate>& cs) {
  std::set<int> out;
  for (const auto& c : cs) out.insert(c.id);
  return out;
}

GAConfig small_config() {
  GAConfig cfg;
  cfg.iterations = 3;
  cfg.init_population = 12;
  cfg.population = 4;
  cfg.offspring = 6;
  cfg.episodes_per_eval = 1;
  cfg.horizon = 120;
  cfg.refresh_every = 0;
  cfg.seed = 17;
  return cfg;
}

}  // namespace

TEST_CASE("conjunction count matches subset enumeration") {
  // Independent count: every non-empty subset of at most four of twelve
  // conditions, each member negated or not.
  std::int64_t brute = 0;
  for (int mask = 1; mask < (1 << 12); ++mask) {
    const int k = __builtin_popcount(static_cast<unsigned>(mask));
    if (k <= 4) brute += std::int64_t{1} << k;
  }
  CHECK(brute == 9968);
  CHECK(conjunction_count(12, 4) == 9968);
  CHECK(conjunction_count(3, 5) == 26);  // 3^3 - 1

  const cpp_int total = program_count(8, 12, 4, 8);
  cpp_int expected = 1;
  for (int i = 0; i < 8; ++i) expected *= 8 * 9968;
  CHECK(total == expected);
  const auto digits = total.str();
  CHECK(digits.size() == 40);
  // 1.6354...e39, which rounds to 1.64e39.
  CHECK(digits.substr(0, 4) == "1635");
}

TEST_CASE("random programs satisfy the table") {
  const auto table = fixture_table();
  const GAConfig cfg;
  Rng rng(5);
  for (int i = 0; i < 500; ++i) {
    const auto p = random_program(table, cfg, rng);
    REQUIRE(p.size() >= 1);
    REQUIRE(p.size() <= static_cast<size_t>(cfg.max_modules));
    CHECK(complies(p, table));
    for (const auto& m : p.modules()) {
      CHECK(dsl::consistent(m.conditions));
      CHECK(m.conditions.size() <= table.at(m.action).size() + cfg.max_extra_conditions);
    }
    CHECK(dsl::parse_program(dsl::render_program(p)) == p);
  }
}

TEST_CASE("without a table every action and condition can appear") {
  const GAConfig cfg;
  Rng rng(6);
  std::set<ActionPrimitive> actions;
  std::set<Condition> conditions;
  for (int i = 0; i < 300; ++i) {
    const auto p = random_program(reasoner::PreconditionTable{}, cfg, rng);
    for (const auto& m : p.modules()) {
      actions.insert(m.action);
      CHECK(m.conditions.size() >= 1);
      CHECK(m.conditions.size() <= 4);
      CHECK(dsl::consistent(m.conditions));
      for (const auto& l : m.conditions) conditions.insert(l.base);
    }
  }
  CHECK(actions.size() == dsl::kNumActionPrimitives);
  CHECK(conditions.size() == dsl::kNumConditions);
}

TEST_CASE("empty table entries still yield non-empty modules") {
  const auto table = reasoner::parse_table("GoIntServing:\n");
  Rng rng(1);
  for (int i = 0; i < 50; ++i) {
    for (const auto& m : random_program(table, GAConfig{}, rng).modules()) {
      CHECK_FALSE(m.conditions.empty());
    }
  }
}

TEST_CASE("compliance") {
  const auto table = fixture_table();
  CHECK(complies(prog("if HoldSoup and ExServing and ExIdlePot: GoIntServing\nRandomAct\n"), table));
  CHECK_FALSE(complies(prog("if HoldSoup: GoIntServing\nRandomAct\n"), table));
  CHECK(complies(dsl::Program{}, table));
  // Actions without an entry are not allowed.
  const auto partial = reasoner::parse_table("GoIntServing: HoldSoup\n");
  CHECK_FALSE(complies(prog("if HoldOnion: GoIntIdlePot\nRandomAct\n"), partial));
}

TEST_CASE("crossover splices a prefix onto a suffix") {
  const auto a = prog("if HoldSoup: GoIntServing\nif HoldOnion: GoIntIdlePot\nif HoldDish: GoIntReadyPot\n");
  const auto b = prog("if ExServing: GoIntDishDisp\nif ExIdlePot: GoIntOnionDisp\n");
  const auto child = crossover_at(a, b, 1, 1, 8);
  REQUIRE(child.size() == 2);
  CHECK(child.modules()[0] == a.modules()[0]);
  CHECK(child.modules()[1] == b.modules()[1]);
  CHECK(crossover_at(a, b, 3, 2, 8) == a);
  CHECK(crossover_at(a, b, 3, 0, 4).size() == 4);
  CHECK(crossover_at(a, b, 2, 0, 8).size() == 4);
  CHECK_THROWS_AS(crossover_at(a, b, 0, 0, 8), std::out_of_range);
  CHECK_THROWS_AS(crossover_at(a, b, 4, 0, 8), std::out_of_range);
  CHECK_THROWS_AS(crossover_at(a, b, 1, 3, 8), std::out_of_range);

  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const auto c = crossover(a, b, 4, rng);
    CHECK(c.size() >= 1);
    CHECK(c.size() <= 4);
    CHECK(c.modules()[0] == a.modules()[0]);
  }
}

TEST_CASE("crossover of compliant parents stays compliant") {
  const auto table = fixture_table();
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const auto a = random_program(table, GAConfig{}, rng);
    const auto b = random_program(table, GAConfig{}, rng);
    CHECK(complies(crossover(a, b, 8, rng), table));
  }
}

TEST_CASE("pareto front") {
  const std::vector<Candidate> cs{cand(0, 100, 10), cand(1, 80, 4), cand(2, 80, 6), cand(3, 120, 12),
                                  cand(4, 60, 4), cand(5, 40, 2), cand(6, 100, 10)};
  // 6 ties 0 on both objectives; neither dominates the other.
  CHECK(ids(pareto_front(cs)) == std::set<int>{0, 1, 3, 5, 6});
  CHECK(pareto_front({}).empty());
  CHECK(ids(pareto_front({cand(9, 0, 3)})) == std::set<int>{9});
}

TEST_CASE("selection order") {
  CHECK(better(cand(0, 10, 5), cand(1, 5, 1)));
  CHECK(better(cand(1, 10, 2), cand(0, 10, 5)));
  CHECK(better(cand(0, 10, 2), cand(1, 10, 2)));
  CHECK_FALSE(better(cand(1, 10, 2), cand(0, 10, 2)));
}

TEST_CASE("cross-eval pool adds the top archive members once") {
  std::vector<Candidate> archive;
  for (int i = 0; i < 20; ++i) archive.push_back(cand(i, i, 5));
  const std::vector<Candidate> front{archive[19], archive[3]};
  GAConfig cfg;
  cfg.cross_eval_top = 5;
  const auto pool = cross_eval_pool(archive, front, cfg);
  CHECK(ids(pool) == std::set<int>{3, 15, 16, 17, 18, 19});
  CHECK(pool.size() == 6);
}

TEST_CASE("config parsing") {
  const auto cfg = parse_config("# tuned\niterations = 7\nepsilon=0.25\n\nseed = 99  # trailing\n");
  CHECK(cfg.iterations == 7);
  CHECK(cfg.epsilon == doctest::Approx(0.25));
  CHECK(cfg.seed == 99);
  CHECK(cfg.population == GAConfig{}.population);
  CHECK(render_config(parse_config(render_config(cfg))) == render_config(cfg));

  CHECK_THROWS_AS(parse_config("iterations 7\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("generations = 7\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("iterations = seven\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("epsilon = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("population = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("immigrants = -1\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/ga.cfg"), ConfigError);
}

TEST_CASE("search is deterministic and elitist") {
  const auto g = test::layout("cramped_room");
  const auto table = fixture_table();
  const auto cfg = small_config();
  extractor::TransitionBuffer b1, b2;
  const auto r1 = ga_search(g, table, cfg, b1);
  const auto r2 = ga_search(g, table, cfg, b2);
  REQUIRE(r1.archive.size() == r2.archive.size());
  for (size_t i = 0; i < r1.archive.size(); ++i) {
    CHECK(r1.archive[i].program == r2.archive[i].program);
    CHECK(r1.archive[i].train_reward == r2.archive[i].train_reward);
  }
  CHECK(b1.records() == b2.records());
  CHECK(b1.total() > 0);

  REQUIRE(r1.best_per_iteration.size() == static_cast<size_t>(cfg.iterations + 1));
  for (size_t i = 1; i < r1.best_per_iteration.size(); ++i) {
    CHECK(r1.best_per_iteration[i] >= r1.best_per_iteration[i - 1]);
  }
  std::set<std::string> texts;
  for (const auto& c : r1.archive) {
    CHECK(texts.insert(dsl::render_program(c.program)).second);
    CHECK(complies(c.program, table));
    CHECK(c.complexity == c.program.complexity());
  }
  CHECK(r1.refreshes == 0);

  // Threads change scheduling but not results.
  auto threaded = cfg;
  threaded.threads = 3;
  extractor::TransitionBuffer b3;
  const auto r3 = ga_search(g, table, threaded, b3);
  REQUIRE(r3.archive.size() == r1.archive.size());
  for (size_t i = 0; i < r1.archive.size(); ++i) CHECK(r3.archive[i].program == r1.archive[i].program);
  CHECK(b3.records() == b1.records());
}

TEST_CASE("refresh swaps the table and injects immigrants") {
  const auto g = test::layout("cramped_room");
  auto cfg = small_config();
  cfg.refresh_every = 2;
  cfg.immigrants = 5;
  int calls = 0;
  const auto serving_only = reasoner::parse_table("GoIntServing: HoldSoup\n");
  extractor::TransitionBuffer buf;
  const auto r = ga_search(g, fixture_table(), cfg, buf, [&](const extractor::TransitionBuffer& b) {
    ++calls;
    CHECK(b.total() > 0);
    return serving_only;
  });
  CHECK(calls == 1);
  CHECK(r.refreshes == 1);
  CHECK(r.table == serving_only);
  int fresh = 0;
  for (const auto& c : r.archive) {
    if (c.generation != 2) continue;
    bool only_serving = true;
    for (const auto& m : c.program.modules()) only_serving = only_serving && m.action == ActionPrimitive::GoIntServing;
    fresh += only_serving ? 1 : 0;
  }
  CHECK(fresh >= cfg.immigrants);
}

TEST_CASE("pair reward is reproducible") {
  const auto g = test::layout("cramped_room");
  const auto listing = dsl::load_program(test::source_path("fixtures/listing1.ktp"));
  const dsl::Program random_only;
  CHECK(pair_reward(listing, random_only, g, 2, 200, 4) == pair_reward(listing, random_only, g, 2, 200, 4));
  CHECK(pair_reward(listing, listing, g, 1, 400, 4) > 0.0);
  CHECK(pair_reward(random_only, random_only, g, 1, 400, 4) == 0.0);
}

TEST_CASE("cross evaluation picks the best partner-sum") {
  const auto g = test::layout("cramped_room");
  std::vector<Candidate> cs;
  cs.push_back(cand(0, 0, 22));
  cs[0].program = dsl::load_program(test::source_path("fixtures/listing1.ktp"));
  cs.push_back(cand(1, 0, 0));
  GAConfig cfg;
  cfg.horizon = 200;
  const auto best = cross_evaluate(cs, cs, g, cfg);
  CHECK(best.id == 0);
  CHECK(cs[0].eval_reward.has_value());
  CHECK(*cs[0].eval_reward > *cs[1].eval_reward);
  std::vector<Candidate> none;
  CHECK_THROWS(cross_evaluate(none, cs, g, cfg));
  CHECK_THROWS(cross_evaluate(cs, none, g, cfg));
}
