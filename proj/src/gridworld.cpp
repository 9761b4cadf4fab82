#include "bifeedback/gridworld.hpp"

#include <cstdlib>
#include <string>

#include "bifeedback/errors.hpp"

namespace bifeedback {

Direction turn_left(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 3) % kNumDirections);
}

Direction turn_right(Direction d) {
  return static_cast<Direction>((static_cast<int>(d) + 1) % kNumDirections);
}

Cell forward_offset(Direction d) {
  switch (d) {
    case Direction::North: return {0, -1};
    case Direction::East: return {1, 0};
    case Direction::South: return {0, 1};
    case Direction::West: return {-1, 0};
  }
  return {0, 0};
}

std::string_view to_string(Direction d) {
  static constexpr std::array<std::string_view, 4> kNames{"North", "East", "South", "West"};
  return kNames[static_cast<int>(d)];
}

std::string_view to_string(Action a) {
  static constexpr std::array<std::string_view, 3> kNames{"TurnLeft", "TurnRight", "Forward"};
  return kNames[static_cast<int>(a)];
}

Action action_from_string(std::string_view name) {
  for (int i = 0; i < kNumActions; ++i) {
    if (to_string(static_cast<Action>(i)) == name) return static_cast<Action>(i);
  }
  throw ConfigError("unknown action '" + std::string(name) + "'");
}

void GridConfig::validate() const {
  if (width < 4 || height < 4) {
    throw ConfigError("grid must be at least 4x4, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  if (max_steps < 1) {
    throw ConfigError("max_steps must be positive, got " + std::to_string(max_steps));
  }
}

GridWorld::GridWorld(GridConfig config) : config_(config) { config_.validate(); }

Cell GridWorld::interior_cell(std::uint64_t index) const {
  const int inner_w = config_.width - 2;
  return {1 + static_cast<int>(index % inner_w), 1 + static_cast<int>(index / inner_w)};
}

Observation GridWorld::reset(std::uint64_t seed) {
  rng_ = SplitMix64(seed);
  const auto cells = static_cast<std::uint64_t>(config_.interior_cells());
  const std::uint64_t agent = rng_.below(cells);
  // Draw the goal among the remaining cells so both are uniform and distinct.
  std::uint64_t goal = rng_.below(cells - 1);
  if (goal >= agent) ++goal;
  agent_pos_ = interior_cell(agent);
  goal_pos_ = interior_cell(goal);
  agent_dir_ = static_cast<Direction>(rng_.below(kNumDirections));
  step_count_ = 0;
  terminated_ = false;
  truncated_ = false;
  started_ = true;
  return observe();
}

bool GridWorld::is_wall(Cell c) const {
  return c.x <= 0 || c.y <= 0 || c.x >= config_.width - 1 || c.y >= config_.height - 1;
}

double GridWorld::success_reward(int k, int max_steps) {
  return 1.0 - 0.9 * (static_cast<double>(k) / static_cast<double>(max_steps));
}

StepOutcome GridWorld::step(Action action) {
  if (!started_) throw StateError("step called before reset");
  if (done()) throw StateError("step called after the episode ended");

  switch (action) {
    case Action::TurnLeft: agent_dir_ = turn_left(agent_dir_); break;
    case Action::TurnRight: agent_dir_ = turn_right(agent_dir_); break;
    case Action::Forward: {
      const Cell d = forward_offset(agent_dir_);
      const Cell next{agent_pos_.x + d.x, agent_pos_.y + d.y};
      if (!is_wall(next)) agent_pos_ = next;
      break;
    }
  }
  ++step_count_;

  StepOutcome out;
  terminated_ = agent_pos_ == goal_pos_;
  truncated_ = !terminated_ && step_count_ == config_.max_steps;
  out.terminated = terminated_;
  out.truncated = truncated_;
  out.reward = terminated_ ? success_reward(step_count_, config_.max_steps) : 0.0;
  out.observation = observe();
  return out;
}

Observation GridWorld::observe() const {
  return {agent_pos_, agent_dir_, goal_pos_, config_.max_steps - step_count_};
}

std::string_view to_string(Heading h) {
  static constexpr std::array<std::string_view, 4> kNames{"Ahead", "Left", "Right", "Behind"};
  return kNames[static_cast<int>(h)];
}

std::string_view to_string(DistanceBucket d) {
  static constexpr std::array<std::string_view, 3> kNames{"Adjacent", "Near", "Far"};
  return kNames[static_cast<int>(d)];
}

Heading heading_from_string(std::string_view name) {
  for (int i = 0; i < kNumHeadings; ++i) {
    if (to_string(static_cast<Heading>(i)) == name) return static_cast<Heading>(i);
  }
  throw ProtocolError("unknown heading '" + std::string(name) + "'");
}

DistanceBucket distance_from_string(std::string_view name) {
  for (int i = 0; i < kNumDistanceBuckets; ++i) {
    if (to_string(static_cast<DistanceBucket>(i)) == name) return static_cast<DistanceBucket>(i);
  }
  throw ProtocolError("unknown distance bucket '" + std::string(name) + "'");
}

int manhattan(Cell a, Cell b) { return std::abs(a.x - b.x) + std::abs(a.y - b.y); }

RelativeGoal relative_goal(const Observation& obs) {
  const Cell fwd = forward_offset(obs.agent_dir);
  const Cell right = forward_offset(turn_right(obs.agent_dir));
  const int dx = obs.goal_pos.x - obs.agent_pos.x;
  const int dy = obs.goal_pos.y - obs.agent_pos.y;
  const int ahead = dx * fwd.x + dy * fwd.y;
  const int lateral = dx * right.x + dy * right.y;

  RelativeGoal rg;
  if (ahead > 0 && ahead >= std::abs(lateral)) {
    rg.heading = Heading::Ahead;
  } else if (ahead < 0 && -ahead > std::abs(lateral)) {
    rg.heading = Heading::Behind;
  } else {
    rg.heading = lateral > 0 ? Heading::Right : Heading::Left;
  }

  const int dist = std::abs(dx) + std::abs(dy);
  rg.distance = dist <= 1 ? DistanceBucket::Adjacent
                          : (dist <= 4 ? DistanceBucket::Near : DistanceBucket::Far);
  return rg;
}

}  // namespace bifeedback
