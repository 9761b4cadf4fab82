#pragma once

#include <cstdint>
#include <exception>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bifeedback/gridworld.hpp"
#include "bifeedback/loop.hpp"
#include "bifeedback/remote_teacher.hpp"
#include "bifeedback/student.hpp"
#include "bifeedback/teacher.hpp"

namespace bifeedback {

enum class Condition { Bidirectional, NoFeedback, OracleTeacher, NoTeacher };
std::string_view to_string(Condition c);
Condition condition_from_string(std::string_view name);

// Which implementation backs the learnable-teacher conditions.
enum class TeacherKind { Tabular, Oracle, Remote };
std::string_view to_string(TeacherKind k);
TeacherKind teacher_kind_from_string(std::string_view name);

struct ExperimentConfig {
  Condition condition = Condition::Bidirectional;
  std::int64_t episodes = 2000;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::int64_t eval_every = 100;
  int eval_episodes = 20;
  int threads = 0;  // 0 = one worker per hardware thread
  bool trace = false;

  GridConfig env;
  std::uint64_t env_seed = 0;
  TeacherKind teacher_kind = TeacherKind::Tabular;
  TeacherConfig teacher;
  RemoteTeacherConfig remote;
  StudentConfig student;

  void validate() const;
  bool feedback_enabled() const;
};

struct MetricsRow {
  std::string condition;
  std::uint64_t seed = 0;
  std::int64_t episode = 0;  // training episodes completed
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_length = 0.0;
  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

// Mean and population standard deviation across seeds at one eval point.
struct AggregateRow {
  std::string condition;
  std::int64_t episode = 0;
  int num_seeds = 0;
  double success_mean = 0.0, success_std = 0.0;
  double return_mean = 0.0, return_std = 0.0;
  double length_mean = 0.0, length_std = 0.0;
  friend bool operator==(const AggregateRow&, const AggregateRow&) = default;
};

struct MetricsSeries {
  std::vector<MetricsRow> rows;  // seed-major, then episode
  std::vector<AggregateRow> aggregates;
};

// Folds per-seed rows into aggregates. Seeds are visited in ascending order
// so the result does not depend on the order of `rows`.
std::vector<AggregateRow> aggregate(const std::vector<MetricsRow>& rows);

struct EvalResult {
  double success_rate = 0.0;
  double mean_return = 0.0;  // discounted by the student's gamma
  double mean_length = 0.0;
};

// Greedy rollouts on the fixed evaluation episodes derived from `env_seed`:
// the teacher decodes its most probable token, the student acts with
// epsilon = 0, and neither learns. Remote teachers see negative episode ids.
EvalResult evaluate_policy(const GridConfig& grid, std::uint64_t env_seed, int eval_episodes,
                           const StudentPolicy& student, Teacher& teacher);

std::uint64_t eval_episode_seed(std::uint64_t env_seed, int i);
std::uint64_t train_episode_seed(std::uint64_t env_seed, std::uint64_t run_seed,
                                 std::int64_t episode);

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::shared_ptr<const StudentPolicy> student;
  std::optional<TeacherPolicy> teacher;  // only for tabular teachers
  std::optional<TeacherPolicy> initial_teacher;
};

struct ExperimentResult {
  MetricsSeries series;
  std::vector<SeedOutcome> outcomes;  // same order as config.seeds
};

struct RunOptions {
  // When set, one JSONL trace per seed is written here.
  std::optional<std::filesystem::path> trace_dir;
};

// Thrown when a seed worker fails. Carries every row produced before the
// failure so callers can flush partial results.
class ExperimentAborted : public std::runtime_error {
 public:
  ExperimentAborted(MetricsSeries partial, std::exception_ptr cause, const std::string& what)
      : std::runtime_error(what), partial_(std::move(partial)), cause_(std::move(cause)) {}
  const MetricsSeries& partial() const { return partial_; }
  std::exception_ptr cause() const { return cause_; }

 private:
  MetricsSeries partial_;
  std::exception_ptr cause_;
};

// Builds the teacher a condition calls for. Remote teachers connect here.
std::unique_ptr<Teacher> make_teacher(const ExperimentConfig& config);

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Runs one seed's training to completion.
SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed,
                     std::vector<MetricsRow>& rows, const RecordSink& sink = {});

std::string trace_file_name(std::uint64_t seed);

void write_csv(const MetricsSeries& series, const std::filesystem::path& path);
std::vector<MetricsRow> read_csv(const std::filesystem::path& path);
void emit_plot_data(const MetricsSeries& series, const std::filesystem::path& path);

}  // namespace bifeedback
