#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "json.hpp"
#include "knowpc/dsl.hpp"
#include "knowpc/random.hpp"
#include "knowpc/rollout.hpp"
#include "knowpc/sim.hpp"

// Live episode where a WebSocket client drives one chef and a program drives
// the other.
namespace knowpc::play {

struct LoggedStep {
  int t = 0;
  sim::EnvAction human = sim::EnvAction::Noop;
  sim::EnvAction agent = sim::EnvAction::Noop;
};

// The game loop without any networking. One tick consumes the latest
// submitted human action (noop if none arrived since the previous tick).
class PlaySession {
 public:
  PlaySession(std::shared_ptr<const sim::GridLayout> layout, dsl::Program program, int human_chef,
              std::uint64_t seed, int horizon = sim::kDefaultHorizon);

  void submit(sim::EnvAction a) { pending_ = a; }
  bool done() const { return state_.terminal(); }
  // Advances one step and returns the new snapshot.
  nlohmann::json tick();

  nlohmann::json snapshot() const;
  nlohmann::json end_message() const;
  int score() const { return score_; }
  int human_chef() const { return human_chef_; }
  const sim::WorldState& state() const { return state_; }
  const std::vector<LoggedStep>& log() const { return log_; }

 private:
  std::shared_ptr<const sim::GridLayout> layout_;
  rollout::ProgramPolicy agent_;
  int human_chef_;
  Rng rng_;
  sim::WorldState state_;
  int score_ = 0;
  std::optional<sim::EnvAction> pending_;
  std::vector<LoggedStep> log_;
};

struct ReplayResult {
  sim::WorldState state;
  int score = 0;
};

// Re-simulates a logged episode.
ReplayResult replay(std::shared_ptr<const sim::GridLayout> layout, int human_chef,
                    const std::vector<LoggedStep>& log, int horizon = sim::kDefaultHorizon);

std::string log_to_ndjson(const std::vector<LoggedStep>& log);
std::vector<LoggedStep> log_from_ndjson(std::string_view text);

// `{"type":"action","value":"up"}` -> action; anything else -> error text.
std::variant<sim::EnvAction, std::string> parse_client_message(std::string_view text);
nlohmann::json error_message(std::string_view what);

// Body of GET /layout.
nlohmann::json layout_json(const sim::GridLayout& layout, int human_chef, int horizon);

struct ServerOptions {
  std::shared_ptr<const sim::GridLayout> layout;
  dsl::Program program;
  std::string address = "127.0.0.1";
  unsigned short port = 0;  // 0 picks a free port
  std::chrono::milliseconds tick{150};
  int human_chef = 0;
  std::uint64_t seed = 0;
  int horizon = sim::kDefaultHorizon;
  std::optional<std::filesystem::path> static_dir;
  std::optional<std::filesystem::path> log_dir;  // replay logs, one file per game
};

// HTTP + WebSocket server on a single I/O thread. One pilot at a time: a
// second /play connection while a game runs is refused with 409.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  unsigned short port() const;
  // Blocks until stop().
  void run();
  // Safe to call from any thread.
  void stop();
  // Replay logs of finished games, in order.
  std::vector<std::vector<LoggedStep>> finished_games() const;

  struct Impl;  // defined in server.cpp

 private:
  std::unique_ptr<Impl> impl_;
};

}  // namespace knowpc::play
