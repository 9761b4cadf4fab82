#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "bifeedback/gridworld.hpp"
#include "bifeedback/rng.hpp"

namespace bifeedback {

// Instruction vocabulary shared by every teacher implementation.
enum class Token : std::uint8_t {
  GoForward = 0,
  TurnLeft = 1,
  TurnRight = 2,
  GoalBehind = 3,
  Explore = 4,
};
inline constexpr int kVocabSize = 5;

std::string_view to_string(Token t);
// Returns nullopt for names outside the vocabulary.
std::optional<Token> token_from_string(std::string_view name);
inline int index(Token t) { return static_cast<int>(t); }

enum class FeedbackSignal : std::uint8_t { Positive, Negative };
std::string_view to_string(FeedbackSignal s);
std::optional<FeedbackSignal> signal_from_string(std::string_view name);

// What the teacher is allowed to see of the world.
struct TeacherContext {
  RelativeGoal rel_goal;
  friend constexpr bool operator==(const TeacherContext&, const TeacherContext&) = default;
};
inline constexpr int kNumContexts = kNumHeadings * kNumDistanceBuckets;
int context_index(const TeacherContext& ctx);
TeacherContext context_from_index(int i);

// Common seam for the tabular, scripted and remote teachers. `episode` and
// `t` are informational and only forwarded over the wire.
class Teacher {
 public:
  virtual ~Teacher() = default;
  virtual Token emit(const TeacherContext& ctx, std::int64_t episode, std::int64_t t,
                     SplitMix64& rng) = 0;
  virtual void apply_feedback(const TeacherContext& ctx, Token token, FeedbackSignal signal) = 0;

  // Deterministic decoding used during evaluation. Teachers without a
  // notion of a mode fall back to emit().
  virtual Token emit_greedy(const TeacherContext& ctx, std::int64_t episode, std::int64_t t,
                            SplitMix64& rng) {
    return emit(ctx, episode, t, rng);
  }
};

struct TeacherConfig {
  double beta = 0.1;
  double temperature = 1.0;
  void validate() const;
};

// Softmax policy over tokens with one logit row per context. Feedback nudges
// a single logit by +/- beta.
class TeacherPolicy {
 public:
  explicit TeacherPolicy(TeacherConfig config = {});

  std::array<double, kVocabSize> probabilities(const TeacherContext& ctx) const;
  Token sample(const TeacherContext& ctx, SplitMix64& rng) const;
  // Most probable token; ties go to the lowest index.
  Token mode(const TeacherContext& ctx) const;
  void apply_feedback(const TeacherContext& ctx, Token token, FeedbackSignal signal);

  double logit(const TeacherContext& ctx, Token token) const;
  void set_logit(const TeacherContext& ctx, Token token, double value);
  const std::vector<double>& logits() const { return logits_; }
  std::vector<double>& mutable_logits() { return logits_; }
  const TeacherConfig& config() const { return config_; }

 private:
  TeacherConfig config_;
  std::vector<double> logits_;  // [context][token]
};

// Numerically stable softmax(logits / temperature).
std::array<double, kVocabSize> softmax(const std::array<double, kVocabSize>& logits,
                                       double temperature);

class TabularTeacher final : public Teacher {
 public:
  explicit TabularTeacher(TeacherConfig config = {}) : policy_(config) {}
  explicit TabularTeacher(TeacherPolicy policy) : policy_(std::move(policy)) {}

  Token emit(const TeacherContext& ctx, std::int64_t episode, std::int64_t t,
             SplitMix64& rng) override;
  void apply_feedback(const TeacherContext& ctx, Token token, FeedbackSignal signal) override;
  Token emit_greedy(const TeacherContext& ctx, std::int64_t, std::int64_t,
                    SplitMix64&) override {
    return policy_.mode(ctx);
  }

  const TeacherPolicy& policy() const { return policy_; }
  TeacherPolicy& policy() { return policy_; }

 private:
  TeacherPolicy policy_;
};

// Idealized scripted teacher: heading -> instruction, distance ignored.
Token oracle_token(const TeacherContext& ctx);

// The primitive action a literal follower would take for a token.
Action follow_token(Token token);

class OracleTeacher final : public Teacher {
 public:
  Token emit(const TeacherContext& ctx, std::int64_t, std::int64_t, SplitMix64&) override {
    return oracle_token(ctx);
  }
  void apply_feedback(const TeacherContext&, Token, FeedbackSignal) override {}
};

// Always emits the same token; stands in for "no teacher".
class ConstantTeacher final : public Teacher {
 public:
  explicit ConstantTeacher(Token token = Token::Explore) : token_(token) {}
  Token emit(const TeacherContext&, std::int64_t, std::int64_t, SplitMix64&) override {
    return token_;
  }
  void apply_feedback(const TeacherContext&, Token, FeedbackSignal) override {}

 private:
  Token token_;
};

}  // namespace bifeedback
