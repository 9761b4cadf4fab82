#include "bifeedback/loop.hpp"

namespace bifeedback {

FeedbackSignal compare_advantage(AdvantageEstimate prev, AdvantageEstimate next) {
  return prev.value > next.value ? FeedbackSignal::Negative : FeedbackSignal::Positive;
}

StepRecord run_step(LoopParts parts, LoopState& state, double epsilon) {
  const Observation obs = parts.env.observe();
  const StateKey s = parts.student.indexer().key(obs);
  const TeacherContext ctx{relative_goal(obs)};
  const Token token = parts.teacher.emit(ctx, state.episode, state.t, parts.teacher_rng);
  if (state.t == 0) state.prev_advantage = parts.student.initial_advantage(s, token);

  const Action action = parts.student.select_action(s, token, epsilon, parts.student_rng);
  const StepOutcome outcome = parts.env.step(action);

  const Transition tr{s,
                      token,
                      action,
                      outcome.reward,
                      parts.student.indexer().key(outcome.observation),
                      outcome.terminated};
  const AdvantageEstimate delta = parts.student.td_update(tr);

  StepRecord rec;
  rec.t = state.t;
  rec.episode = state.episode;
  rec.ctx = ctx;
  rec.token = token;
  rec.action = action;
  rec.reward = outcome.reward;
  rec.prev_advantage = state.prev_advantage.value;
  rec.advantage = delta.value;
  rec.terminated = outcome.terminated;
  rec.truncated = outcome.truncated;

  if (state.feedback_enabled) {
    const FeedbackSignal signal = compare_advantage(state.prev_advantage, delta);
    parts.teacher.apply_feedback(ctx, token, signal);
    rec.feedback = signal;
  }
  state.prev_advantage = delta;
  ++state.t;
  return rec;
}

std::vector<StepRecord> run_episode(LoopParts parts, LoopState& state, std::uint64_t env_seed,
                                    double epsilon, const RecordSink& sink) {
  parts.env.reset(env_seed);
  state.t = 0;
  state.prev_advantage = {};
  std::vector<StepRecord> records;
  while (!parts.env.done()) {
    records.push_back(run_step(parts, state, epsilon));
    if (sink) sink(records.back());
  }
  return records;
}

}  // namespace bifeedback
