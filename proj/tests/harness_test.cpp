#include "bifeedback/harness.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "bifeedback/errors.hpp"

namespace bifeedback {
namespace {

namespace fs = std::filesystem;

ExperimentConfig small_config(Condition c = Condition::Bidirectional) {
  ExperimentConfig cfg;
  cfg.condition = c;
  cfg.episodes = 40;
  cfg.eval_every = 10;
  cfg.seeds = {1, 2, 3};
  cfg.threads = 2;
  return cfg;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class HarnessTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("bifeedback_harness_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(HarnessTest, CountsRowsAndAggregates) {
  const ExperimentResult res = run_experiment(small_config());
  EXPECT_EQ(res.series.rows.size(), 12u);
  ASSERT_EQ(res.series.aggregates.size(), 4u);
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(res.series.aggregates[i].episode, static_cast<std::int64_t>(10 * (i + 1)));
    EXPECT_EQ(res.series.aggregates[i].num_seeds, 3);
  }
  for (const MetricsRow& r : res.series.rows) {
    EXPECT_EQ(r.condition, "bidirectional");
    EXPECT_GE(r.success_rate, 0.0);
    EXPECT_LE(r.success_rate, 1.0);
    EXPECT_GE(r.mean_return, 0.0);
    EXPECT_LE(r.mean_return, 1.0);
  }
}

TEST_F(HarnessTest, RepeatedRunsAreByteIdentical) {
  ExperimentConfig cfg = small_config();
  write_csv(run_experiment(cfg).series, dir_ / "a.csv");
  cfg.threads = 1;
  write_csv(run_experiment(cfg).series, dir_ / "b.csv");
  EXPECT_EQ(slurp(dir_ / "a.csv"), slurp(dir_ / "b.csv"));
}

TEST_F(HarnessTest, SeedOrderOnlyPermutesRows) {
  ExperimentConfig cfg = small_config();
  const ExperimentResult a = run_experiment(cfg);
  cfg.seeds = {3, 1, 2};
  const ExperimentResult b = run_experiment(cfg);
  EXPECT_EQ(a.series.aggregates, b.series.aggregates);
  auto key = [](const MetricsRow& r) { return std::make_pair(r.seed, r.episode); };
  auto sorted = [&](std::vector<MetricsRow> rows) {
    std::sort(rows.begin(), rows.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    return rows;
  };
  EXPECT_EQ(sorted(a.series.rows), sorted(b.series.rows));
  EXPECT_NE(a.series.rows, b.series.rows);
}

TEST_F(HarnessTest, NoFeedbackKeepsInitialLogits) {
  ExperimentConfig cfg = small_config(Condition::NoFeedback);
  cfg.episodes = 200;
  cfg.eval_every = 100;
  for (const SeedOutcome& o : run_experiment(cfg).outcomes) {
    ASSERT_TRUE(o.teacher.has_value());
    ASSERT_TRUE(o.initial_teacher.has_value());
    EXPECT_EQ(o.teacher->logits(), o.initial_teacher->logits());
  }
  cfg.condition = Condition::Bidirectional;
  const auto outcomes = run_experiment(cfg).outcomes;
  EXPECT_NE(outcomes.front().teacher->logits(), outcomes.front().initial_teacher->logits());
}

TEST_F(HarnessTest, EvaluationHasNoSideEffects) {
  ExperimentConfig cfg = small_config();
  cfg.episodes = 300;
  cfg.eval_every = 300;
  cfg.seeds = {4};
  const SeedOutcome o = run_experiment(cfg).outcomes.front();
  const StudentPolicy before = *o.student;
  TabularTeacher teacher(*o.teacher);
  const auto logits = teacher.policy().logits();
  const EvalResult r1 = evaluate_policy(cfg.env, cfg.env_seed, 20, *o.student, teacher);
  const EvalResult r2 = evaluate_policy(cfg.env, cfg.env_seed, 20, *o.student, teacher);
  EXPECT_TRUE(*o.student == before);
  EXPECT_EQ(teacher.policy().logits(), logits);
  EXPECT_EQ(r1.success_rate, r2.success_rate);
  EXPECT_EQ(r1.mean_return, r2.mean_return);
}

TEST_F(HarnessTest, EmptySeriesWritesHeaderOnly) {
  write_csv(MetricsSeries{}, dir_ / "empty.csv");
  EXPECT_EQ(slurp(dir_ / "empty.csv"),
            "condition,seed,episode,success_rate,mean_return,mean_length\n");
  EXPECT_TRUE(read_csv(dir_ / "empty.csv").empty());
}

TEST_F(HarnessTest, CsvRoundTrip) {
  MetricsSeries s;
  s.rows.push_back({"oracle-teacher", 18446744073709551615ull, 3000, 0.95, 1.0 / 3.0, 11.05});
  write_csv(s, dir_ / "one.csv");
  EXPECT_EQ(read_csv(dir_ / "one.csv"), s.rows);
  EXPECT_THROW(read_csv(dir_ / "missing.csv"), IoError);
  EXPECT_THROW(write_csv(s, dir_ / "no" / "such" / "dir.csv"), IoError);
}

TEST_F(HarnessTest, AggregateUsesPopulationStd) {
  const ExperimentResult res = run_experiment(small_config());
  std::map<std::int64_t, std::vector<double>> by_episode;
  for (const MetricsRow& r : res.series.rows) by_episode[r.episode].push_back(r.mean_length);
  for (const AggregateRow& a : res.series.aggregates) {
    const auto& xs = by_episode.at(a.episode);
    double sum = 0.0, sq = 0.0;
    for (double x : xs) {
      sum += x;
      sq += x * x;
    }
    const double mean = sum / xs.size();
    EXPECT_NEAR(a.length_mean, mean, 1e-9);
    EXPECT_NEAR(a.length_std, std::sqrt(std::max(0.0, sq / xs.size() - mean * mean)), 1e-6);
  }
}

TEST_F(HarnessTest, PlotDataHasOneLinePerEvalPoint) {
  const ExperimentResult res = run_experiment(small_config());
  emit_plot_data(res.series, dir_ / "plot.csv");
  std::ifstream in(dir_ / "plot.csv");
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 4);
}

TEST_F(HarnessTest, TraceFilesAreWrittenPerSeed) {
  RunOptions opts;
  opts.trace_dir = dir_ / "traces";
  run_experiment(small_config(), opts);
  for (std::uint64_t seed : {1, 2, 3}) {
    EXPECT_TRUE(fs::exists(dir_ / "traces" / trace_file_name(seed)));
  }
}

TEST_F(HarnessTest, ValidateRejectsBadConfigs) {
  ExperimentConfig cfg = small_config();
  cfg.seeds = {};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.seeds = {1, 1};
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.eval_every = 41;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = small_config();
  cfg.episodes = 0;
  EXPECT_THROW(cfg.validate(), ConfigError);
}

TEST_F(HarnessTest, RemoteFailureAbortsWithCause) {
  StubTeacherServer server(StubMode::BadToken);
  std::thread thread([&] { server.serve(false); });
  ExperimentConfig cfg = small_config();
  cfg.teacher_kind = TeacherKind::Remote;
  cfg.remote.endpoint = "127.0.0.1:" + std::to_string(server.port());
  cfg.remote.timeout_ms = 1000;
  try {
    run_experiment(cfg);
    ADD_FAILURE() << "expected abort";
  } catch (const ExperimentAborted& e) {
    EXPECT_THROW(std::rethrow_exception(e.cause()), ProtocolError);
    EXPECT_TRUE(e.partial().rows.empty());
  }
  server.stop();
  thread.join();
}

TEST(ConditionTest, NamesRoundTrip) {
  for (Condition c : {Condition::Bidirectional, Condition::NoFeedback, Condition::OracleTeacher,
                      Condition::NoTeacher}) {
    EXPECT_EQ(condition_from_string(to_string(c)), c);
  }
  EXPECT_THROW(condition_from_string("sideways"), ConfigError);
}

}  // namespace
}  // namespace bifeedback
