#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "bifeedback/gridworld.hpp"
#include "bifeedback/rng.hpp"
#include "bifeedback/student.hpp"
#include "bifeedback/teacher.hpp"

namespace bifeedback {

// Negative iff the previous advantage is strictly larger; ties are Positive.
FeedbackSignal compare_advantage(AdvantageEstimate prev, AdvantageEstimate next);

struct LoopState {
  AdvantageEstimate prev_advantage;
  std::int64_t t = 0;
  std::int64_t episode = 0;
  bool feedback_enabled = true;
};

struct StepRecord {
  std::int64_t t = 0;
  std::int64_t episode = 0;
  TeacherContext ctx;
  Token token = Token::GoForward;
  Action action = Action::TurnLeft;
  double reward = 0.0;
  // Advantage carried into this step, and the TD error this step produced.
  double prev_advantage = 0.0;
  double advantage = 0.0;
  std::optional<FeedbackSignal> feedback;
  bool terminated = false;
  bool truncated = false;
};

using RecordSink = std::function<void(const StepRecord&)>;

// Everything one teacher/student pair needs to interact with the world.
struct LoopParts {
  GridWorld& env;
  Teacher& teacher;
  StudentPolicy& student;
  SplitMix64& teacher_rng;
  SplitMix64& student_rng;
};

// One pass through the teacher -> student -> environment -> TD -> feedback
// cycle. When state.t == 0 the carried advantage is first seeded with
// initial_advantage(s0, x0).
StepRecord run_step(LoopParts parts, LoopState& state, double epsilon);

// Resets the environment with `env_seed` and steps until the episode ends.
// The advantage carry never crosses episode boundaries.
std::vector<StepRecord> run_episode(LoopParts parts, LoopState& state, std::uint64_t env_seed,
                                    double epsilon, const RecordSink& sink = {});

}  // namespace bifeedback
