#pragma once

#include <array>
#include <cstdint>
#include <string_view>

#include "bifeedback/rng.hpp"

namespace bifeedback {

struct Cell {
  int x = 0;
  int y = 0;  // grows southward
  friend constexpr bool operator==(const Cell&, const Cell&) = default;
};

enum class Direction : std::uint8_t { North = 0, East = 1, South = 2, West = 3 };
inline constexpr int kNumDirections = 4;

enum class Action : std::uint8_t { TurnLeft = 0, TurnRight = 1, Forward = 2 };
inline constexpr int kNumActions = 3;

Direction turn_left(Direction d);
Direction turn_right(Direction d);
Cell forward_offset(Direction d);

std::string_view to_string(Direction d);
std::string_view to_string(Action a);
Action action_from_string(std::string_view name);

struct Observation {
  Cell agent_pos;
  Direction agent_dir = Direction::North;
  Cell goal_pos;
  int steps_remaining = 0;
  friend constexpr bool operator==(const Observation&, const Observation&) = default;
};

struct StepOutcome {
  Observation observation;
  double reward = 0.0;
  bool terminated = false;
  bool truncated = false;
};

struct GridConfig {
  int width = 8;
  int height = 8;
  int max_steps = 64;

  // Throws ConfigError when the grid has fewer than two interior cells
  // or the step budget is not positive.
  void validate() const;
  int interior_cells() const { return (width - 2) * (height - 2); }
};

// Single-room navigation task: one agent, one goal, no distractors. The
// outer ring of cells is wall. Fully observed.
class GridWorld {
 public:
  explicit GridWorld(GridConfig config);

  Observation reset(std::uint64_t seed);
  StepOutcome step(Action action);

  Observation observe() const;
  bool done() const { return terminated_ || truncated_; }
  bool is_wall(Cell c) const;

  const GridConfig& config() const { return config_; }
  Cell agent_pos() const { return agent_pos_; }
  Direction agent_dir() const { return agent_dir_; }
  Cell goal_pos() const { return goal_pos_; }
  int step_count() const { return step_count_; }

  // Reward for reaching the goal on step `k` of an episode with budget
  // `max_steps`.
  static double success_reward(int k, int max_steps);

 private:
  Cell interior_cell(std::uint64_t index) const;

  GridConfig config_;
  SplitMix64 rng_;
  Cell agent_pos_;
  Direction agent_dir_ = Direction::North;
  Cell goal_pos_;
  int step_count_ = 0;
  bool terminated_ = false;
  bool truncated_ = false;
  bool started_ = false;
};

enum class Heading : std::uint8_t { Ahead = 0, Left = 1, Right = 2, Behind = 3 };
enum class DistanceBucket : std::uint8_t { Adjacent = 0, Near = 1, Far = 2 };
inline constexpr int kNumHeadings = 4;
inline constexpr int kNumDistanceBuckets = 3;

std::string_view to_string(Heading h);
std::string_view to_string(DistanceBucket d);
Heading heading_from_string(std::string_view name);
DistanceBucket distance_from_string(std::string_view name);

// Egocentric, coarse description of where the goal is.
struct RelativeGoal {
  Heading heading = Heading::Ahead;
  DistanceBucket distance = DistanceBucket::Adjacent;
  friend constexpr bool operator==(const RelativeGoal&, const RelativeGoal&) = default;
};

// Heading follows the dominant egocentric axis of the goal offset. On an
// exact diagonal, goals in front resolve to Ahead and goals behind resolve
// to the lateral side. A goal on the agent's own cell reads as Left.
// Distance is Manhattan: 0-1 Adjacent, 2-4 Near, 5+ Far.
RelativeGoal relative_goal(const Observation& obs);

int manhattan(Cell a, Cell b);

}  // namespace bifeedback
