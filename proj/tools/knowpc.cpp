// Command-line entry point: train, eval, inspect, serve.
#include <chrono>
#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "knowpc/harness.hpp"
#include "knowpc/play_server.hpp"

namespace {

using namespace knowpc;
namespace fs = std::filesystem;

int run_train(const std::string& layout_name, const std::string& mode_name, std::uint64_t seed,
              const std::string& out, const std::string& config, const fs::path& layouts_dir) {
  const auto mode = reasoner::parse_mode(mode_name);
  if (!mode) throw std::runtime_error("unknown mode '" + mode_name + "' (knowpc, knowpc-m, pc)");
  harness::TrainOptions opt;
  opt.layout = harness::load_layout(layout_name, layouts_dir);
  opt.mode = *mode;
  if (!config.empty()) opt.cfg = synth::load_config(config);
  opt.cfg.seed = seed;
  opt.out_dir = out;
  const auto start = std::chrono::steady_clock::now();
  const auto r = harness::train(opt);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cout << "layout " << opt.layout->name() << "  mode " << mode_name << "  seed " << seed << '\n';
  std::cout << "archive " << r.search.archive.size() << "  front " << r.front.size()
            << "  best complexity " << r.best.complexity << '\n';
  std::cout << dsl::render_program(r.best.program);
  std::cout << "final eval reward " << r.final_reward << "  (" << secs << " s)\n";
  return 0;
}

int run_eval(const std::vector<std::string>& programs, const std::vector<std::string>& layouts,
             int episodes, std::uint64_t seed, const std::string& out_prefix,
             const fs::path& layouts_dir) {
  std::vector<harness::Entrant> entrants;
  for (const auto& p : programs) entrants.push_back(harness::resolve_entrant(p));
  for (const auto& name : layouts) {
    const auto layout = harness::load_layout(name, layouts_dir);
    const auto m = harness::eval_matrix(entrants, layout, episodes, seed);
    const auto raw = harness::matrix_csv(m);
    const auto norm = harness::matrix_csv(m, true);
    std::cout << raw << '\n' << norm << '\n';
    if (!out_prefix.empty()) {
      std::ofstream(out_prefix + m.layout + ".csv") << raw;
      std::ofstream(out_prefix + m.layout + ".normalized.csv") << norm;
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Programmatic cooperative policies for a two-chef kitchen"};
  app.require_subcommand(1);
  std::string layouts_dir = harness::default_layouts_dir().string();
  app.add_option("--layouts-dir", layouts_dir, "Directory of bundled layouts");

  auto* train = app.add_subcommand("train", "Synthesize a program on one layout");
  std::string layout, mode = "knowpc", out, config;
  std::uint64_t seed = 0;
  train->add_option("--layout", layout, "Layout name or path")->required();
  train->add_option("--mode", mode, "knowpc | knowpc-m | pc");
  train->add_option("--seed", seed, "Random seed");
  train->add_option("--out", out, "Experiment directory")->required();
  train->add_option("--config", config, "key = value config file");

  auto* eval = app.add_subcommand("eval", "Cross-play reward matrices");
  std::vector<std::string> programs, layouts;
  int episodes = 10;
  std::string csv_prefix;
  eval->add_option("--programs", programs, "Program files or bot:random / bot:idle")->required();
  eval->add_option("--layouts", layouts, "Layout names or paths")->required();
  eval->add_option("--episodes", episodes, "Episodes per role assignment");
  eval->add_option("--seed", seed, "Random seed");
  eval->add_option("--csv", csv_prefix, "Write <prefix><layout>.csv files");

  auto* insp = app.add_subcommand("inspect", "Report on an experiment directory");
  std::string dir;
  insp->add_option("dir", dir, "Experiment directory")->required();

  auto* serve = app.add_subcommand("serve", "Play one chef against a program over WebSocket");
  std::string program, static_dir;
  unsigned short port = 8080;
  int tick_ms = 150, human_chef = 0;
  serve->add_option("--layout", layout, "Layout name or path")->required();
  serve->add_option("--program", program, "Program file")->required();
  serve->add_option("--port", port, "TCP port");
  serve->add_option("--tick-ms", tick_ms, "Milliseconds per tick");
  serve->add_option("--human-chef", human_chef, "Chef index driven by the client (0 or 1)");
  serve->add_option("--static", static_dir, "Directory of static web assets");
  serve->add_option("--seed", seed, "Random seed for the program's random actions");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return run_train(layout, mode, seed, out, config, layouts_dir);
    if (*eval) return run_eval(programs, layouts, episodes, seed, csv_prefix, layouts_dir);
    if (*insp) {
      harness::inspect(dir, std::cout);
      return 0;
    }
    if (*serve) {
      play::ServerOptions opt;
      opt.layout = harness::load_layout(layout, layouts_dir);
      opt.program = dsl::load_program(program);
      opt.port = port;
      opt.tick = std::chrono::milliseconds(tick_ms);
      opt.human_chef = human_chef;
      opt.seed = seed;
      if (!static_dir.empty()) opt.static_dir = static_dir;
      play::Server server(std::move(opt));
      std::cout << "serving on port " << server.port() << '\n' << std::flush;
      server.run();
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
