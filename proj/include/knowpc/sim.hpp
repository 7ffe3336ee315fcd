#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

// Two-chef Overcooked-style kitchen: layouts, world state, and the joint
// transition function.
namespace knowpc::sim {

enum class Tile : std::uint8_t { Floor, Counter, OnionDispenser, DishDispenser, Pot, Serving };
enum class Direction : std::uint8_t { Up, Down, Left, Right };
enum class Item : std::uint8_t { None, Onion, Dish, Soup };
enum class EnvAction : std::uint8_t { Up, Down, Left, Right, Noop, Interact };

inline constexpr int kNumEnvActions = 6;
inline constexpr std::array<EnvAction, kNumEnvActions> kAllEnvActions{
    EnvAction::Up,   EnvAction::Down, EnvAction::Left,
    EnvAction::Right, EnvAction::Noop, EnvAction::Interact};
inline constexpr std::array<Direction, 4> kAllDirections{Direction::Up, Direction::Down,
                                                         Direction::Left, Direction::Right};

inline constexpr int kCookTicks = 20;
inline constexpr int kDefaultHorizon = 400;
inline constexpr int kDeliveryReward = 20;
inline constexpr int kMaxOnions = 3;

struct Coord {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const Coord&, const Coord&) = default;
};

Coord neighbor(Coord c, Direction d);
std::optional<Direction> movement_direction(EnvAction a);
EnvAction move_action(Direction d);

std::string_view to_string(EnvAction a);
std::string_view to_string(Item item);
std::string_view to_string(Direction d);
std::optional<EnvAction> parse_env_action(std::string_view s);

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SimError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

struct Spawn {
  Coord pos;
  Direction facing = Direction::Up;
};

// A floor tile from which a chef can face an interaction point.
struct Approach {
  Coord tile;
  Direction facing;
};

// Non-floor tile. `slot` indexes WorldState::pots or WorldState::counters;
// -1 for stateless points (dispensers, serving).
struct InteractionPoint {
  Coord pos;
  Tile kind = Tile::Counter;
  int slot = -1;
  std::vector<Approach> approaches;
};

class GridLayout {
 public:
  static constexpr int kUnreachable = -1;

  // Parses the ASCII layout format and validates it. Throws LayoutError.
  static GridLayout parse(std::string_view text, std::string name);
  static GridLayout load_file(const std::filesystem::path& path);

  const std::string& name() const { return name_; }
  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Coord c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
  Tile tile(Coord c) const { return tiles_[index(c)]; }
  bool is_floor(Coord c) const { return in_bounds(c) && tile(c) == Tile::Floor; }

  const std::array<Spawn, 2>& spawns() const { return spawns_; }
  // Interaction points in row-major order.
  const std::vector<InteractionPoint>& points() const { return points_; }
  int point_at(Coord c) const { return in_bounds(c) ? point_index_[index(c)] : -1; }
  int num_pots() const { return num_pots_; }
  int num_counters() const { return num_counters_; }
  int count(Tile kind) const;

  // Shortest 4-connected walk over floor tiles; kUnreachable if disconnected.
  int distance(Coord from, Coord to) const;

  // Inverse of parse(): one row per line, '1'/'2' on spawn tiles.
  std::string render() const;

 private:
  int index(Coord c) const { return c.y * width_ + c.x; }
  void compute_distances();

  std::string name_;
  int width_ = 0;
  int height_ = 0;
  std::vector<Tile> tiles_;
  std::array<Spawn, 2> spawns_{};
  std::vector<InteractionPoint> points_;
  std::vector<int> point_index_;
  std::vector<int> floor_index_;
  int num_floor_ = 0;
  std::vector<int> dist_;
  int num_pots_ = 0;
  int num_counters_ = 0;
};

struct ChefState {
  Coord pos;
  Direction facing = Direction::Up;
  Item held = Item::None;
  friend bool operator==(const ChefState&, const ChefState&) = default;
};

struct PotState {
  int onions = 0;
  int cook_time = 0;

  bool ready() const { return onions == kMaxOnions && cook_time == kCookTicks; }
  bool accepts_onion() const { return onions < kMaxOnions; }
  bool cooking() const { return onions == kMaxOnions && cook_time < kCookTicks; }
  friend bool operator==(const PotState&, const PotState&) = default;
};

struct WorldState {
  std::shared_ptr<const GridLayout> layout;
  std::array<ChefState, 2> chefs{};
  std::vector<PotState> pots;
  std::vector<Item> counters;
  int t = 0;
  int horizon = kDefaultHorizon;

  bool terminal() const { return t >= horizon; }
  Coord facing_tile(int chef) const { return neighbor(chefs[chef].pos, chefs[chef].facing); }
  // Canonical text form; equal states serialize identically.
  std::string serialize() const;

  friend bool operator==(const WorldState& a, const WorldState& b) {
    return a.layout == b.layout && a.chefs == b.chefs && a.pots == b.pots &&
           a.counters == b.counters && a.t == b.t && a.horizon == b.horizon;
  }
};

WorldState reset(std::shared_ptr<const GridLayout> layout, int horizon = kDefaultHorizon);

struct StepOutcome {
  WorldState state;
  int reward = 0;
};

// Pure transition. Throws SimError on a terminated episode.
StepOutcome step(const WorldState& state, EnvAction a1, EnvAction a2);
// Same transition applied in place; returns the shared reward.
int step_in_place(WorldState& state, EnvAction a1, EnvAction a2);

// Interaction-point classes addressed by condition and action primitives.
enum class PointClass : std::uint8_t {
  Serving,
  OnionDisp,
  DishDisp,
  OnionCounter,
  DishCounter,
  SoupCounter,
  EmptyCounter,
  IdlePot,
  ReadyPot,
};
inline constexpr int kNumPointClasses = 9;

// Class of a point in the current state; nullopt for a cooking pot.
std::optional<PointClass> classify_point(const WorldState& state, int point);

// ---- symbolic element records ----

enum class PointType : std::uint8_t { OnionDispenser, DishDispenser, Counter, Pot, Serving };
enum class RelPos : std::uint8_t { On, Face, Away };

std::string_view to_string(PointType t);
std::string_view to_string(RelPos p);

// One element from a chef's perspective. id 0 is the observing chef; id i+1
// is layout point i.
struct ElementView {
  int id = 0;
  bool is_player = false;
  PointType type = PointType::Counter;
  Item item = Item::None;  // held item for the player, content for counters
  PotState pot;
  RelPos pos = RelPos::Away;
};

bool is_stateless(PointType t);
std::vector<ElementView> observe_elements(const WorldState& state, int chef);
RelPos relative_position(const WorldState& state, int chef, Coord point);

// Counts soups held, on counters, or ready in pots.
int count_soups(const WorldState& state);

}  // namespace knowpc::sim
