#include "bifeedback/cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "bifeedback/trace.hpp"

namespace bifeedback::cli {
namespace {

namespace fs = std::filesystem;

struct Invocation {
  int code = -1;
  std::string out;
  std::string err;
};

Invocation invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "bifeedback");
  std::vector<char*> argv;
  for (std::string& a : args) argv.push_back(a.data());
  argv.push_back(nullptr);
  std::ostringstream out, err;
  Invocation inv;
  inv.code = main(static_cast<int>(args.size()), argv.data(), out, err);
  inv.out = out.str();
  inv.err = err.str();
  return inv;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           (std::string("bifeedback_cli_") +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }
  fs::path dir_;
};

TEST_F(CliTest, SetOverridesConfigFile) {
  write(dir_ / "run.toml", "version = 1\n[student]\nalpha = 0.2\ngamma = 0.9 # comment\n");
  const RunSpec spec = parse_args({"train", "--config", (dir_ / "run.toml").string(), "--set",
                                   "student.alpha=0.05"});
  EXPECT_EQ(spec.subcommand, Subcommand::Train);
  const ExperimentConfig cfg = resolve_config(spec);
  EXPECT_EQ(cfg.student.alpha, 0.05);
  EXPECT_EQ(cfg.student.gamma, 0.9);
  EXPECT_EQ(cfg.student.epsilon_end, 0.05);
}

TEST_F(CliTest, UnknownKeyIsUsageErrorNamingKey) {
  try {
    parse_args({"train", "--set", "bogus.key=1"});
    FAIL() << "expected UsageError";
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("bogus.key"), std::string::npos);
  }
  const Invocation inv = invoke({"train", "--set", "bogus.key=1", "--out", dir_.string()});
  EXPECT_EQ(inv.code, kConfigError);
  EXPECT_NE(inv.err.find("bogus.key"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir_ / "manifest.json"));
}

TEST_F(CliTest, RemoteTeacherAddressIsParsed) {
  const RunSpec spec =
      parse_args({"evaluate", "--teacher", "remote:127.0.0.1:9000", "--checkpoint", "x.ckpt"});
  EXPECT_EQ(spec.subcommand, Subcommand::Evaluate);
  const ExperimentConfig cfg = resolve_config(spec);
  EXPECT_EQ(cfg.teacher_kind, TeacherKind::Remote);
  EXPECT_EQ(cfg.remote.endpoint, "127.0.0.1:9000");
  EXPECT_THROW(parse_args({"train", "--teacher", "remote:nowhere"}), UsageError);
  EXPECT_THROW(parse_args({"train", "--teacher", "psychic"}), UsageError);
}

TEST_F(CliTest, ShortcutFlags) {
  const ExperimentConfig cfg = resolve_config(parse_args(
      {"train", "--condition", "no-feedback", "--episodes", "300", "--seeds", "4, 5,6"}));
  EXPECT_EQ(cfg.condition, Condition::NoFeedback);
  EXPECT_EQ(cfg.episodes, 300);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{4, 5, 6}));
}

TEST_F(CliTest, MalformedInputsAreUsageErrors) {
  EXPECT_THROW(parse_args({"train", "--seeds", "1,x"}), UsageError);
  EXPECT_THROW(parse_args({"train", "--seeds", ""}), UsageError);
  EXPECT_THROW(parse_args({"train", "--frobnicate"}), UsageError);
  EXPECT_THROW(parse_args({"train", "--set", "student.alpha"}), UsageError);
  EXPECT_THROW(parse_args({"launch"}), UsageError);
  EXPECT_THROW(parse_args({"evaluate"}), UsageError);
  EXPECT_THROW(parse_args({"replay"}), UsageError);
  EXPECT_EQ(invoke({"train", "--seeds", "1,x"}).code, kConfigError);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST_F(CliTest, ConfigFileErrors) {
  write(dir_ / "bad.toml", "[student]\nalpha = 0.1\nlearning_rate = 3\n");
  try {
    parse_config_file(dir_ / "bad.toml");
    resolve_config(parse_args({"train", "--config", (dir_ / "bad.toml").string()}));
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("student.learning_rate"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
  }
  write(dir_ / "v2.toml", "version = 2\n");
  EXPECT_THROW(parse_config_file(dir_ / "v2.toml"), ConfigError);
  EXPECT_EQ(invoke({"train", "--config", (dir_ / "missing.toml").string()}).code, kIoError);
}

TEST_F(CliTest, ConfigTextSyntax) {
  const auto settings = parse_config_text(
      "# header\n"
      "env.max_steps = 32\n"
      "[experiment]\n"
      "seeds = [7, 8]\n"
      "condition = \"oracle-teacher\"\n"
      "trace = true\n");
  ExperimentConfig cfg;
  for (const auto& [k, v] : settings) apply_setting(cfg, k, v);
  EXPECT_EQ(cfg.env.max_steps, 32);
  EXPECT_EQ(cfg.seeds, (std::vector<std::uint64_t>{7, 8}));
  EXPECT_EQ(cfg.condition, Condition::OracleTeacher);
  EXPECT_TRUE(cfg.trace);
  for (const std::string& key : known_config_keys()) {
    ExperimentConfig copy = cfg;
    apply_setting(copy, key, get_setting(cfg, key));
    EXPECT_EQ(get_setting(copy, key), get_setting(cfg, key)) << key;
  }
}

TEST_F(CliTest, TrainWritesOutputsAndReplayVerifies) {
  const fs::path out = dir_ / "run";
  const Invocation train = invoke({"train", "--episodes", "40", "--seeds", "1,2", "--set",
                                   "experiment.eval_every=20", "--set", "experiment.trace=true",
                                   "--out", out.string()});
  ASSERT_EQ(train.code, kOk) << train.err;
  for (const char* f : {"manifest.json", "metrics.csv", "plot.csv", "checkpoints/seed_1.ckpt",
                        "checkpoints/seed_2.ckpt", "traces/trace_seed_1.jsonl"}) {
    EXPECT_TRUE(fs::exists(out / f)) << f;
  }
  std::ifstream manifest(out / "manifest.json");
  const auto json = nlohmann::json::parse(manifest);
  EXPECT_EQ(json.at("config").at("experiment.episodes"), "40");
  EXPECT_TRUE(json.contains("version"));

  EXPECT_EQ(invoke({"replay", "--trace", (out / "traces").string()}).code, kOk);
  EXPECT_EQ(invoke({"replay", "--trace", (out / "traces/trace_seed_2.jsonl").string()}).code, kOk);

  const Invocation eval =
      invoke({"evaluate", "--checkpoint", (out / "checkpoints/seed_1.ckpt").string()});
  ASSERT_EQ(eval.code, kOk) << eval.err;
  EXPECT_TRUE(nlohmann::json::parse(eval.out).contains("success_rate"));
  EXPECT_EQ(invoke({"evaluate", "--checkpoint", (dir_ / "none.ckpt").string()}).code, kIoError);
}

TEST_F(CliTest, ReplayFlagsFlippedFeedback) {
  const fs::path out = dir_ / "run";
  ASSERT_EQ(invoke({"train", "--episodes", "10", "--seeds", "3", "--set",
                    "experiment.eval_every=10", "--set", "experiment.trace=true", "--out",
                    out.string()})
                .code,
            kOk);
  std::ifstream in(out / "traces/trace_seed_3.jsonl");
  std::vector<std::string> lines;
  for (std::string l; std::getline(in, l);) lines.push_back(l);
  ASSERT_GT(lines.size(), 30u);
  TraceEntry entry = decode_trace_line(lines[30]);
  entry.record.feedback = *entry.record.feedback == FeedbackSignal::Positive
                              ? FeedbackSignal::Negative
                              : FeedbackSignal::Positive;
  lines[30] = encode_trace_line(entry.record, entry.seed);
  {
    std::ofstream tampered(dir_ / "tampered.jsonl");
    for (const auto& l : lines) tampered << l << '\n';
  }
  const Invocation inv = invoke({"replay", "--trace", (dir_ / "tampered.jsonl").string()});
  EXPECT_NE(inv.code, kOk);
  EXPECT_EQ(inv.code, kVerificationFailed);
  const std::string step = "t=" + std::to_string(entry.record.t);
  EXPECT_NE((inv.out + inv.err).find(step), std::string::npos) << inv.out << inv.err;
}

TEST_F(CliTest, ServeCheck) {
  StubTeacherServer good(StubMode::Oracle);
  StubTeacherServer bad(StubMode::BadToken);
  std::thread t1([&] { good.serve(false); });
  std::thread t2([&] { bad.serve(false); });
  const auto ep = [](const StubTeacherServer& s) {
    return "teacher.endpoint=127.0.0.1:" + std::to_string(s.port());
  };
  EXPECT_EQ(invoke({"serve-check", "--set", ep(good)}).code, kOk);
  EXPECT_EQ(invoke({"serve-check", "--set", ep(bad)}).code, kProtocolError);
  good.stop();
  bad.stop();
  t1.join();
  t2.join();
}

TEST(TraceCodecTest, RoundTrip) {
  StepRecord rec;
  rec.t = 12;
  rec.episode = 345;
  rec.ctx = {{Heading::Behind, DistanceBucket::Near}};
  rec.token = Token::GoalBehind;
  rec.action = Action::Forward;
  rec.reward = 0.859375;
  rec.prev_advantage = 0.1 + 0.2;
  rec.advantage = -1e-300;
  rec.feedback = FeedbackSignal::Positive;
  rec.terminated = true;
  const TraceEntry e = decode_trace_line(encode_trace_line(rec, 99));
  EXPECT_EQ(e.seed, 99u);
  EXPECT_EQ(e.record.t, rec.t);
  EXPECT_EQ(e.record.episode, rec.episode);
  EXPECT_EQ(e.record.ctx, rec.ctx);
  EXPECT_EQ(e.record.token, rec.token);
  EXPECT_EQ(e.record.action, rec.action);
  EXPECT_EQ(e.record.reward, rec.reward);
  EXPECT_EQ(e.record.prev_advantage, rec.prev_advantage);
  EXPECT_EQ(e.record.advantage, rec.advantage);
  EXPECT_EQ(e.record.feedback, rec.feedback);
  EXPECT_TRUE(e.record.terminated);
  EXPECT_FALSE(e.record.truncated);
  rec.feedback.reset();
  EXPECT_FALSE(decode_trace_line(encode_trace_line(rec, 1)).record.feedback.has_value());
}

}  // namespace
}  // namespace bifeedback::cli
