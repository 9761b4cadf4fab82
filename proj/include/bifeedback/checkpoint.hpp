#pragma once

#include <filesystem>
#include <optional>

#include "bifeedback/student.hpp"
#include "bifeedback/teacher.hpp"

namespace bifeedback {

// Text checkpoint, version 1. Line oriented, values in C99 hex-float so the
// tables round-trip exactly:
//
//   bifeedback-checkpoint 1
//   grid <width> <height>
//   student <alpha> <gamma> <epsilon_start> <epsilon_end> <epsilon_decay_fraction>
//   v <n>                         then n lines: <state> <value>
//   q <n>                         then n lines: <state> <token> <action> <value>
//   teacher none | teacher <beta> <temperature>
//   logits <n>                    then n lines: <context> <token> <value>
//   end
//
// Only nonzero V and Q entries are listed; absent entries read as 0.
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  StudentPolicy student;
  std::optional<TeacherPolicy> teacher;
};

void save_checkpoint(const std::filesystem::path& path, const StudentPolicy& student,
                     const TeacherPolicy* teacher);

// Throws IoError when the file cannot be read or is malformed.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace bifeedback
