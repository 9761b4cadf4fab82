#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <vector>

#include "bifeedback/gridworld.hpp"
#include "bifeedback/rng.hpp"
#include "bifeedback/teacher.hpp"

namespace bifeedback {

struct StudentConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  // Fraction of the training episodes over which epsilon decays linearly.
  double epsilon_decay_fraction = 0.5;

  void validate() const;
  double epsilon_at(std::int64_t episode, std::int64_t total_episodes) const;
};

// Dense index of (agent_pos, agent_dir, goal_pos) for one grid size.
using StateKey = std::uint32_t;

class StateIndexer {
 public:
  StateIndexer(int width, int height) : width_(width), height_(height) {}
  StateKey key(const Observation& obs) const;
  Observation decode(StateKey key) const;  // steps_remaining is left at 0
  std::size_t size() const;
  int width() const { return width_; }
  int height() const { return height_; }

 private:
  int width_;
  int height_;
};

struct Transition {
  StateKey s = 0;
  Token x = Token::GoForward;
  Action a = Action::TurnLeft;
  double r = 0.0;
  StateKey s_next = 0;
  bool terminal = false;
};

// Advantage estimate (a TD error) compared between consecutive steps.
struct AdvantageEstimate {
  double value = 0.0;
};

// Token-conditioned tabular Q(s, x, a) with a state value table V(s).
class StudentPolicy {
 public:
  StudentPolicy(StateIndexer indexer, StudentConfig config);

  double q(StateKey s, Token x, Action a) const { return q_[q_index(s, x, a)]; }
  double& q(StateKey s, Token x, Action a) { return q_[q_index(s, x, a)]; }
  double v(StateKey s) const { return v_[s]; }
  double& v(StateKey s) { return v_[s]; }
  double max_q(StateKey s, Token x) const;

  // Epsilon-greedy over Q(s, x, .). Greedy ties go to the lowest action
  // index. The rng is only consumed when epsilon > 0.
  Action select_action(StateKey s, Token x, double epsilon, SplitMix64& rng) const;
  Action greedy_action(StateKey s, Token x) const;

  // One-step TD on both tables. Returns the TD error of V computed from the
  // pre-update tables; terminal transitions never read s_next.
  AdvantageEstimate td_update(const Transition& tr);

  // mean_a Q(s0, x0, a) - V(s0)
  AdvantageEstimate initial_advantage(StateKey s0, Token x0) const;

  const StateIndexer& indexer() const { return indexer_; }
  const StudentConfig& config() const { return config_; }
  const std::vector<double>& q_table() const { return q_; }
  const std::vector<double>& v_table() const { return v_; }
  std::size_t num_states() const { return v_.size(); }

  friend bool operator==(const StudentPolicy& a, const StudentPolicy& b) {
    return a.q_ == b.q_ && a.v_ == b.v_;
  }

 private:
  std::size_t q_index(StateKey s, Token x, Action a) const {
    return (static_cast<std::size_t>(s) * kVocabSize + index(x)) * kNumActions +
           static_cast<std::size_t>(a);
  }

  StateIndexer indexer_;
  StudentConfig config_;
  std::vector<double> q_;
  std::vector<double> v_;
};

}  // namespace bifeedback
