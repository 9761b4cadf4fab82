#include "bifeedback/student.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "bifeedback/errors.hpp"

namespace bifeedback {

void StudentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ConfigError("student.alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw ConfigError("student.gamma must lie in [0, 1]");
  for (double e : {epsilon_start, epsilon_end}) {
    if (!(e >= 0.0 && e <= 1.0)) throw ConfigError("student epsilon values must lie in [0, 1]");
  }
  if (!(epsilon_decay_fraction >= 0.0 && epsilon_decay_fraction <= 1.0)) {
    throw ConfigError("student.epsilon_decay_fraction must lie in [0, 1]");
  }
}

double StudentConfig::epsilon_at(std::int64_t episode, std::int64_t total_episodes) const {
  const double horizon = epsilon_decay_fraction * static_cast<double>(total_episodes);
  if (horizon <= 0.0 || static_cast<double>(episode) >= horizon) return epsilon_end;
  const double frac = static_cast<double>(episode) / horizon;
  return epsilon_start + (epsilon_end - epsilon_start) * frac;
}

StateKey StateIndexer::key(const Observation& obs) const {
  const auto cells = static_cast<std::uint32_t>(width_ * height_);
  const auto agent = static_cast<std::uint32_t>(obs.agent_pos.y * width_ + obs.agent_pos.x);
  const auto goal = static_cast<std::uint32_t>(obs.goal_pos.y * width_ + obs.goal_pos.x);
  return (agent * kNumDirections + static_cast<std::uint32_t>(obs.agent_dir)) * cells + goal;
}

Observation StateIndexer::decode(StateKey key) const {
  const auto cells = static_cast<std::uint32_t>(width_ * height_);
  const std::uint32_t goal = key % cells;
  key /= cells;
  const std::uint32_t dir = key % kNumDirections;
  const std::uint32_t agent = key / kNumDirections;
  Observation obs;
  obs.agent_pos = {static_cast<int>(agent % width_), static_cast<int>(agent / width_)};
  obs.agent_dir = static_cast<Direction>(dir);
  obs.goal_pos = {static_cast<int>(goal % width_), static_cast<int>(goal / width_)};
  return obs;
}

std::size_t StateIndexer::size() const {
  const auto cells = static_cast<std::size_t>(width_) * height_;
  return cells * kNumDirections * cells;
}

StudentPolicy::StudentPolicy(StateIndexer indexer, StudentConfig config)
    : indexer_(indexer),
      config_(config),
      q_(indexer.size() * kVocabSize * kNumActions, 0.0),
      v_(indexer.size(), 0.0) {
  config_.validate();
}

double StudentPolicy::max_q(StateKey s, Token x) const {
  const auto* row = &q_[q_index(s, x, Action::TurnLeft)];
  return *std::max_element(row, row + kNumActions);
}

Action StudentPolicy::greedy_action(StateKey s, Token x) const {
  const auto* row = &q_[q_index(s, x, Action::TurnLeft)];
  int best = 0;
  for (int a = 1; a < kNumActions; ++a) {
    if (row[a] > row[best]) best = a;
  }
  return static_cast<Action>(best);
}

Action StudentPolicy::select_action(StateKey s, Token x, double epsilon, SplitMix64& rng) const {
  if (epsilon > 0.0 && rng.uniform() < epsilon) {
    return static_cast<Action>(rng.below(kNumActions));
  }
  return greedy_action(s, x);
}

AdvantageEstimate StudentPolicy::td_update(const Transition& tr) {
  const double gamma = config_.gamma;
  const double v_next = tr.terminal ? 0.0 : v_[tr.s_next];
  // Q bootstraps through V(s') rather than max_a' Q(s', x, a'): the token
  // at s' is generally not x, and Q(s', x, .) is never trained for tokens
  // the teacher does not emit at s'.
  const double delta = tr.r + gamma * v_next - v_[tr.s];
  double& q_sa = q_[q_index(tr.s, tr.x, tr.a)];
  const double q_target = tr.r + gamma * v_next;

  v_[tr.s] += config_.alpha * delta;
  q_sa += config_.alpha * (q_target - q_sa);
  return {delta};
}

AdvantageEstimate StudentPolicy::initial_advantage(StateKey s0, Token x0) const {
  const auto* row = &q_[q_index(s0, x0, Action::TurnLeft)];
  const double mean = std::accumulate(row, row + kNumActions, 0.0) / kNumActions;
  return {mean - v_[s0]};
}

}  // namespace bifeedback
