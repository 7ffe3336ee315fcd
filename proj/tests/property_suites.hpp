#pragma once

// Randomized property checks shared by the doctest suite and the acceptance
// runner. Each returns a failure description, or an empty string on success.

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "knowpc/dsl.hpp"
#include "knowpc/nav.hpp"
#include "knowpc/reasoner.hpp"
#include "knowpc/synth.hpp"

namespace knowpc::props {

struct SuiteResult {
  std::string failure;  // empty = pass
  int cases = 0;

  bool ok() const { return failure.empty(); }
};

// Random programs drawn from a table, and crossover children of them, all
// satisfy that table.
inline SuiteResult compliance_closure(const std::vector<reasoner::PreconditionTable>& tables,
                                      int corpus, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  synth::GAConfig cfg;
  for (const auto& table : tables) {
    std::vector<dsl::Program> pool;
    const int per_table = corpus / static_cast<int>(tables.size());
    for (int i = 0; i < per_table; ++i) {
      dsl::Program p;
      if (i < per_table / 2 || pool.size() < 2) {
        p = synth::random_program(table, cfg, rng);
      } else {
        const auto& a = pool[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))];
        const auto& b = pool[static_cast<size_t>(uniform_int(rng, 0, static_cast<int>(pool.size()) - 1))];
        p = synth::crossover(a, b, cfg.max_modules, rng);
      }
      ++r.cases;
      if (!synth::complies(p, table)) {
        r.failure = "non-compliant program:\n" + dsl::render_program(p);
        return r;
      }
      for (const auto& m : p.modules()) {
        if (m.conditions.empty() || !dsl::consistent(m.conditions)) {
          r.failure = "malformed module in:\n" + dsl::render_program(p);
          return r;
        }
      }
      pool.push_back(std::move(p));
    }
  }
  return r;
}

// Quadratic reference: a candidate is on the front iff nobody is at least as
// good on both objectives and strictly better on one.
inline std::set<int> pareto_oracle(const std::vector<synth::Candidate>& cs) {
  std::set<int> out;
  for (const auto& c : cs) {
    bool dominated = false;
    for (const auto& d : cs) {
      if (d.train_reward >= c.train_reward && d.complexity <= c.complexity &&
          (d.train_reward > c.train_reward || d.complexity < c.complexity)) {
        dominated = true;
        break;
      }
    }
    if (!dominated) out.insert(c.id);
  }
  return out;
}

inline SuiteResult pareto_vs_oracle(int sets, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  for (int s = 0; s < sets; ++s) {
    std::vector<synth::Candidate> cs(static_cast<size_t>(uniform_int(rng, 0, 60)));
    for (size_t i = 0; i < cs.size(); ++i) {
      cs[i].id = static_cast<int>(i);
      cs[i].train_reward = 20.0 * uniform_int(rng, 0, 10);  // coarse values force ties
      cs[i].complexity = uniform_int(rng, 1, 15);
    }
    std::set<int> got;
    for (const auto& c : synth::pareto_front(cs)) got.insert(c.id);
    ++r.cases;
    if (got != pareto_oracle(cs)) {
      r.failure = "front differs from oracle on set " + std::to_string(s);
      return r;
    }
  }
  return r;
}

// Shuffling the modules after the first firing one never changes the choice.
inline SuiteResult first_match_invariance(int trials, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  synth::GAConfig cfg;
  const reasoner::PreconditionTable no_table;
  for (int t = 0; t < trials; ++t) {
    const auto p = synth::random_program(no_table, cfg, rng);
    dsl::ConditionContext ctx;
    ctx.held = static_cast<sim::Item>(uniform_int(rng, 0, 3));
    for (int c = 0; c < sim::kNumPointClasses; ++c) {
      if (uniform_int(rng, 0, 1) == 1) ctx.reach.insert(static_cast<sim::PointClass>(c));
    }
    Rng pick(1);
    const auto base = dsl::select_action(p, ctx, pick);
    if (base.module == dsl::kFallback) continue;
    auto modules = p.modules();
    std::shuffle(modules.begin() + base.module + 1, modules.end(), rng);
    Rng pick2(1);
    const auto again = dsl::select_action(dsl::Program(modules), ctx, pick2);
    ++r.cases;
    if (again.primitive != base.primitive || again.module != base.module) {
      r.failure = "permutation changed the choice for:\n" + dsl::render_program(p);
      return r;
    }
  }
  return r;
}

// Random walled kitchen with every required point on the border next to
// floor. Returns nullptr when the draw is not a valid layout.
inline std::shared_ptr<const sim::GridLayout> random_micro_layout(Rng& rng) {
  const int w = uniform_int(rng, 5, 8);
  const int h = uniform_int(rng, 4, 6);
  std::vector<std::string> rows(static_cast<size_t>(h), std::string(static_cast<size_t>(w), 'X'));
  std::vector<sim::Coord> floor;
  for (int y = 1; y < h - 1; ++y) {
    for (int x = 1; x < w - 1; ++x) {
      if (uniform_int(rng, 0, 3) > 0) {
        rows[static_cast<size_t>(y)][static_cast<size_t>(x)] = ' ';
        floor.push_back({x, y});
      }
    }
  }
  if (floor.size() < 3) return nullptr;
  std::vector<sim::Coord> border;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (rows[static_cast<size_t>(y)][static_cast<size_t>(x)] != 'X') continue;
      bool next_to_floor = false;
      for (auto d : sim::kAllDirections) {
        const auto n = sim::neighbor({x, y}, d);
        if (n.x >= 0 && n.y >= 0 && n.x < w && n.y < h &&
            rows[static_cast<size_t>(n.y)][static_cast<size_t>(n.x)] == ' ') {
          next_to_floor = true;
        }
      }
      if (next_to_floor) border.push_back({x, y});
    }
  }
  if (border.size() < 5) return nullptr;
  std::shuffle(border.begin(), border.end(), rng);
  const std::string kinds = "ODPS";
  for (size_t i = 0; i < kinds.size(); ++i) {
    rows[static_cast<size_t>(border[i].y)][static_cast<size_t>(border[i].x)] = kinds[i];
  }
  std::shuffle(floor.begin(), floor.end(), rng);
  rows[static_cast<size_t>(floor[0].y)][static_cast<size_t>(floor[0].x)] = '1';
  rows[static_cast<size_t>(floor[1].y)][static_cast<size_t>(floor[1].x)] = '2';
  std::string text;
  for (const auto& row : rows) text += row + "\n";
  try {
    auto g = sim::GridLayout::parse(text, "micro");
    // Keep single-room kitchens so every target is reachable from everywhere.
    for (const auto& f : floor) {
      if (g.distance(floor[0], f) == sim::GridLayout::kUnreachable) return nullptr;
    }
    return std::make_shared<const sim::GridLayout>(std::move(g));
  } catch (const sim::LayoutError&) {
    return nullptr;
  }
}

// Teammate parked on a dead-end tile facing a wall: it never lies on a
// shortest path, so nothing blocks. From every start tile the controller
// moves strictly closer each step and interacts within distance + 4 steps.
inline SuiteResult nav_progress(int layouts, std::uint64_t seed) {
  SuiteResult r;
  Rng rng(seed);
  int built = 0;
  for (int attempt = 0; built < layouts && attempt < layouts * 500; ++attempt) {
    const auto g = random_micro_layout(rng);
    if (!g) continue;
    // Dead end: exactly one floor neighbor.
    std::optional<sim::Coord> park;
    std::optional<sim::Direction> wall;
    for (int y = 0; y < g->height() && !park; ++y) {
      for (int x = 0; x < g->width() && !park; ++x) {
        const sim::Coord c{x, y};
        if (!g->is_floor(c)) continue;
        int open = 0;
        std::optional<sim::Direction> closed;
        for (auto d : sim::kAllDirections) {
          if (g->is_floor(sim::neighbor(c, d))) {
            ++open;
          } else if (!closed) {
            closed = d;
          }
        }
        if (open == 1) {
          park = c;
          wall = closed;
        }
      }
    }
    if (!park) continue;
    ++built;
    for (auto target : {sim::PointClass::Serving, sim::PointClass::OnionDisp,
                        sim::PointClass::DishDisp, sim::PointClass::IdlePot}) {
      for (int y = 0; y < g->height(); ++y) {
        for (int x = 0; x < g->width(); ++x) {
          const sim::Coord start{x, y};
          if (!g->is_floor(start) || start == *park) continue;
          auto s = sim::reset(g);
          s.chefs[1] = {*park, *wall, sim::Item::None};
          s.chefs[0] = {start, sim::Direction::Up, sim::Item::None};
          const auto goal = nav::nearest_target(s, 0, target);
          if (!goal) {
            r.failure = "target unreachable in a connected micro-layout:\n" + g->render();
            return r;
          }
          // The parked teammate standing on the only approach is not a
          // progress case.
          if (goal->approach.tile == *park) continue;
          ++r.cases;
          Rng nav_rng(static_cast<std::uint64_t>(r.cases));
          int last = goal->distance;
          int steps = 0;
          while (true) {
            const auto a = nav::next_env_action(s, 0, target, nav_rng);
            if (a == sim::EnvAction::Interact) break;
            sim::step_in_place(s, a, sim::EnvAction::Noop);
            const auto now = nav::nearest_target(s, 0, target);
            // Off the approach tile every move must shorten the distance.
            if (sim::movement_direction(a) && last > 0 && now->distance >= last) {
              std::ostringstream msg;
              msg << "no progress from (" << x << "," << y << ") toward class "
                  << static_cast<int>(target) << ":\n"
                  << g->render();
              r.failure = msg.str();
              return r;
            }
            last = now->distance;
            if (++steps > goal->distance + 4) {
              std::ostringstream msg;
              msg << "bound exceeded from (" << x << "," << y << "):\n" << g->render();
              r.failure = msg.str();
              return r;
            }
          }
        }
      }
    }
  }
  if (built < layouts) r.failure = "could not generate enough micro-layouts";
  return r;
}

}  // namespace knowpc::props
