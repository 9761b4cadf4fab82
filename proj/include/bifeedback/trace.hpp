#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>

#include "bifeedback/loop.hpp"

namespace bifeedback {

// One StepRecord per line as a JSON object. Doubles are written in their
// shortest round-trip form so a trace replays bit-exactly.
std::string encode_trace_line(const StepRecord& rec, std::uint64_t seed);

struct TraceEntry {
  std::uint64_t seed = 0;
  StepRecord record;
};

// Throws ProtocolError on a malformed line.
TraceEntry decode_trace_line(std::string_view line);

class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, std::uint64_t seed);
  void write(const StepRecord& rec);
  void close();
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  std::uint64_t seed_;
  std::ofstream out_;
};

struct ReplayReport {
  std::int64_t steps_checked = 0;
  std::int64_t signals_checked = 0;
  // Set to a description of the first inconsistent step, if any.
  std::optional<std::string> failure;
  bool ok() const { return !failure.has_value(); }
};

// Re-derives every feedback signal from the recorded advantages and checks
// that each step's carried advantage equals the previous step's TD error.
ReplayReport replay_trace(const std::filesystem::path& path);

}  // namespace bifeedback
