#include "bifeedback/trace.hpp"

#include <json.hpp>

#include "bifeedback/errors.hpp"

namespace bifeedback {

using nlohmann::json;

std::string encode_trace_line(const StepRecord& rec, std::uint64_t seed) {
  json j = {
      {"seed", seed},
      {"episode", rec.episode},
      {"t", rec.t},
      {"heading", to_string(rec.ctx.rel_goal.heading)},
      {"distance", to_string(rec.ctx.rel_goal.distance)},
      {"token", to_string(rec.token)},
      {"action", to_string(rec.action)},
      {"reward", rec.reward},
      {"prev_advantage", rec.prev_advantage},
      {"advantage", rec.advantage},
      {"feedback", rec.feedback ? json(to_string(*rec.feedback)) : json(nullptr)},
      {"terminated", rec.terminated},
      {"truncated", rec.truncated},
  };
  return j.dump();
}

TraceEntry decode_trace_line(std::string_view line) {
  json j = json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw ProtocolError("malformed trace line");
  TraceEntry e;
  try {
    e.seed = j.at("seed").get<std::uint64_t>();
    StepRecord& r = e.record;
    r.episode = j.at("episode").get<std::int64_t>();
    r.t = j.at("t").get<std::int64_t>();
    r.ctx.rel_goal.heading = heading_from_string(j.at("heading").get<std::string>());
    r.ctx.rel_goal.distance = distance_from_string(j.at("distance").get<std::string>());
    const auto token = token_from_string(j.at("token").get<std::string>());
    if (!token) throw ProtocolError("unknown token in trace");
    r.token = *token;
    r.action = action_from_string(j.at("action").get<std::string>());
    r.reward = j.at("reward").get<double>();
    r.prev_advantage = j.at("prev_advantage").get<double>();
    r.advantage = j.at("advantage").get<double>();
    const json& fb = j.at("feedback");
    if (!fb.is_null()) {
      const auto signal = signal_from_string(fb.get<std::string>());
      if (!signal) throw ProtocolError("unknown feedback signal in trace");
      r.feedback = *signal;
    }
    r.terminated = j.at("terminated").get<bool>();
    r.truncated = j.at("truncated").get<bool>();
  } catch (const json::exception& ex) {
    throw ProtocolError(std::string("malformed trace line: ") + ex.what());
  } catch (const ConfigError& ex) {
    throw ProtocolError(std::string("malformed trace line: ") + ex.what());
  }
  return e;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, std::uint64_t seed)
    : path_(path), seed_(seed), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw IoError(path.string(), "cannot open trace for writing");
}

void TraceWriter::write(const StepRecord& rec) {
  out_ << encode_trace_line(rec, seed_) << '\n';
  if (!out_) throw IoError(path_.string(), "write failed");
}

void TraceWriter::close() {
  out_.close();
  if (out_.fail()) throw IoError(path_.string(), "close failed");
}

ReplayReport replay_trace(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open trace");

  ReplayReport report;
  std::optional<TraceEntry> prev;
  std::string line;
  std::int64_t line_no = 0;
  auto where = [&](const TraceEntry& e) {
    return "seed " + std::to_string(e.seed) + " episode " + std::to_string(e.record.episode) +
           " step t=" + std::to_string(e.record.t) + " (line " + std::to_string(line_no) + ")";
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    TraceEntry e;
    try {
      e = decode_trace_line(line);
    } catch (const ProtocolError& ex) {
      report.failure = "line " + std::to_string(line_no) + ": " + ex.what();
      return report;
    }
    const StepRecord& r = e.record;
    ++report.steps_checked;

    if (r.feedback) {
      ++report.signals_checked;
      const FeedbackSignal expected = compare_advantage({r.prev_advantage}, {r.advantage});
      if (expected != *r.feedback) {
        report.failure = where(e) + ": recorded feedback " + std::string(to_string(*r.feedback)) +
                         " but advantages " + json(r.prev_advantage).dump() + " -> " +
                         json(r.advantage).dump() + " give " + std::string(to_string(expected));
        return report;
      }
    }

    const bool continues = prev && prev->seed == e.seed &&
                           prev->record.episode == r.episode && prev->record.t + 1 == r.t;
    if (continues && prev->record.advantage != r.prev_advantage) {
      report.failure = where(e) + ": carried advantage does not match previous step's TD error";
      return report;
    }
    prev = e;
  }
  if (in.bad()) throw IoError(path.string(), "read failed");
  return report;
}

}  // namespace bifeedback
