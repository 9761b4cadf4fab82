#include "bifeedback/teacher.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "bifeedback/errors.hpp"

namespace bifeedback {

namespace {

constexpr std::array<std::string_view, kVocabSize> kTokenNames{
    "go_forward", "turn_left", "turn_right", "goal_behind", "explore"};

}  // namespace

std::string_view to_string(Token t) { return kTokenNames[index(t)]; }

std::optional<Token> token_from_string(std::string_view name) {
  for (int i = 0; i < kVocabSize; ++i) {
    if (kTokenNames[i] == name) return static_cast<Token>(i);
  }
  return std::nullopt;
}

std::string_view to_string(FeedbackSignal s) {
  return s == FeedbackSignal::Positive ? "positive" : "negative";
}

std::optional<FeedbackSignal> signal_from_string(std::string_view name) {
  if (name == "positive") return FeedbackSignal::Positive;
  if (name == "negative") return FeedbackSignal::Negative;
  return std::nullopt;
}

int context_index(const TeacherContext& ctx) {
  return static_cast<int>(ctx.rel_goal.heading) * kNumDistanceBuckets +
         static_cast<int>(ctx.rel_goal.distance);
}

TeacherContext context_from_index(int i) {
  return {{static_cast<Heading>(i / kNumDistanceBuckets),
           static_cast<DistanceBucket>(i % kNumDistanceBuckets)}};
}

void TeacherConfig::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("teacher.beta must be a positive finite number");
  }
  if (!(temperature > 0.0) || !std::isfinite(temperature)) {
    throw ConfigError("teacher.temperature must be a positive finite number");
  }
}

std::array<double, kVocabSize> softmax(const std::array<double, kVocabSize>& logits,
                                       double temperature) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::array<double, kVocabSize> p{};
  double total = 0.0;
  for (int i = 0; i < kVocabSize; ++i) {
    p[i] = std::exp((logits[i] - top) / temperature);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

TeacherPolicy::TeacherPolicy(TeacherConfig config)
    : config_(config), logits_(static_cast<std::size_t>(kNumContexts) * kVocabSize, 0.0) {
  config_.validate();
}

double TeacherPolicy::logit(const TeacherContext& ctx, Token token) const {
  return logits_[context_index(ctx) * kVocabSize + index(token)];
}

void TeacherPolicy::set_logit(const TeacherContext& ctx, Token token, double value) {
  logits_[context_index(ctx) * kVocabSize + index(token)] = value;
}

std::array<double, kVocabSize> TeacherPolicy::probabilities(const TeacherContext& ctx) const {
  std::array<double, kVocabSize> row{};
  std::copy_n(logits_.begin() + context_index(ctx) * kVocabSize, kVocabSize, row.begin());
  return softmax(row, config_.temperature);
}

Token TeacherPolicy::sample(const TeacherContext& ctx, SplitMix64& rng) const {
  const auto p = probabilities(ctx);
  const double u = rng.uniform();
  double acc = 0.0;
  for (int i = 0; i < kVocabSize - 1; ++i) {
    acc += p[i];
    if (u < acc) return static_cast<Token>(i);
  }
  return static_cast<Token>(kVocabSize - 1);
}

Token TeacherPolicy::mode(const TeacherContext& ctx) const {
  const auto row = logits_.begin() + context_index(ctx) * kVocabSize;
  return static_cast<Token>(std::max_element(row, row + kVocabSize) - row);
}

void TeacherPolicy::apply_feedback(const TeacherContext& ctx, Token token,
                                   FeedbackSignal signal) {
  double& entry = logits_[context_index(ctx) * kVocabSize + index(token)];
  entry += signal == FeedbackSignal::Positive ? config_.beta : -config_.beta;
}

Token TabularTeacher::emit(const TeacherContext& ctx, std::int64_t, std::int64_t,
                           SplitMix64& rng) {
  return policy_.sample(ctx, rng);
}

void TabularTeacher::apply_feedback(const TeacherContext& ctx, Token token,
                                    FeedbackSignal signal) {
  policy_.apply_feedback(ctx, token, signal);
}

Token oracle_token(const TeacherContext& ctx) {
  switch (ctx.rel_goal.heading) {
    case Heading::Ahead: return Token::GoForward;
    case Heading::Left: return Token::TurnLeft;
    case Heading::Right: return Token::TurnRight;
    case Heading::Behind: return Token::GoalBehind;
  }
  return Token::Explore;
}

Action follow_token(Token token) {
  switch (token) {
    case Token::GoForward: return Action::Forward;
    case Token::TurnLeft: return Action::TurnLeft;
    case Token::TurnRight: return Action::TurnRight;
    case Token::GoalBehind: return Action::TurnLeft;
    case Token::Explore: return Action::Forward;
  }
  return Action::Forward;
}

}  // namespace bifeedback
