#include "bifeedback/checkpoint.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "bifeedback/errors.hpp"

namespace bifeedback {
namespace {

namespace fs = std::filesystem;

class CheckpointTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("bifeedback_ckpt_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
            "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path dir_;
};

TEST_F(CheckpointTest, RoundTripsExactly) {
  StudentConfig cfg;
  cfg.alpha = 0.3;
  StudentPolicy student(StateIndexer(6, 7), cfg);
  TeacherPolicy teacher(TeacherConfig{0.25, 0.7});
  SplitMix64 rng(8);
  for (int i = 0; i < 2000; ++i) {
    const auto s = static_cast<StateKey>(rng.below(student.num_states()));
    student.v(s) = rng.uniform() * 2 - 1;
    student.q(s, static_cast<Token>(rng.below(kVocabSize)), static_cast<Action>(rng.below(3))) =
        std::ldexp(rng.uniform(), -static_cast<int>(rng.below(60)));
  }
  for (double& l : teacher.mutable_logits()) l = rng.uniform() * 10 - 5;

  const fs::path path = dir_ / "a.ckpt";
  save_checkpoint(path, student, &teacher);
  const Checkpoint loaded = load_checkpoint(path);
  EXPECT_TRUE(loaded.student == student);
  EXPECT_EQ(loaded.student.indexer().width(), 6);
  EXPECT_EQ(loaded.student.indexer().height(), 7);
  EXPECT_EQ(loaded.student.config().alpha, 0.3);
  ASSERT_TRUE(loaded.teacher.has_value());
  EXPECT_EQ(loaded.teacher->logits(), teacher.logits());
  EXPECT_EQ(loaded.teacher->config().beta, 0.25);
  EXPECT_EQ(loaded.teacher->config().temperature, 0.7);
}

TEST_F(CheckpointTest, TeacherIsOptional) {
  const StudentPolicy student(StateIndexer(8, 8), StudentConfig{});
  save_checkpoint(dir_ / "b.ckpt", student, nullptr);
  const Checkpoint loaded = load_checkpoint(dir_ / "b.ckpt");
  EXPECT_FALSE(loaded.teacher.has_value());
  EXPECT_TRUE(loaded.student == student);
}

TEST_F(CheckpointTest, RejectsMissingAndMalformedFiles) {
  EXPECT_THROW(load_checkpoint(dir_ / "missing.ckpt"), IoError);
  {
    std::ofstream out(dir_ / "bad.ckpt");
    out << "bifeedback-checkpoint 2\n";
  }
  EXPECT_THROW(load_checkpoint(dir_ / "bad.ckpt"), IoError);
  const StudentPolicy student(StateIndexer(8, 8), StudentConfig{});
  save_checkpoint(dir_ / "c.ckpt", student, nullptr);
  {
    std::ofstream out(dir_ / "c.ckpt", std::ios::app);
    out << "garbage\n";
  }
  EXPECT_THROW(load_checkpoint(dir_ / "c.ckpt"), IoError);
}

}  // namespace
}  // namespace bifeedback
