#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <string>
#include <string_view>

#include "bifeedback/net.hpp"
#include "bifeedback/protocol.hpp"
#include "bifeedback/teacher.hpp"

namespace bifeedback {

// What happens when the remote teacher does not answer in time.
enum class RemoteFallback { Oracle, Abort };
std::string_view to_string(RemoteFallback f);
RemoteFallback remote_fallback_from_string(std::string_view name);

struct RemoteTeacherConfig {
  std::string endpoint;  // host:port
  int timeout_ms = 5000;
  RemoteFallback fallback = RemoteFallback::Oracle;
};

// Teacher backed by an external process speaking the line protocol. One
// request is in flight at a time. After a timeout the connection is dropped
// (a late reply would desynchronize it) and re-established on next use.
class RemoteTeacher final : public Teacher {
 public:
  explicit RemoteTeacher(RemoteTeacherConfig config);
  ~RemoteTeacher() override;

  Token emit(const TeacherContext& ctx, std::int64_t episode, std::int64_t t,
             SplitMix64& rng) override;
  void apply_feedback(const TeacherContext& ctx, Token token, FeedbackSignal signal) override;

  // Sends a shutdown message and closes the connection.
  void shutdown();

  int fallbacks_used() const { return fallbacks_; }

 private:
  protocol::Message exchange(const protocol::Message& request);
  void ensure_connected();

  RemoteTeacherConfig config_;
  net::Endpoint endpoint_;
  net::LineStream stream_;
  int fallbacks_ = 0;
};

// Connects, performs one emit and one feedback round trip, then shuts the
// session down. Throws ProtocolError (or TimeoutError) on any deviation.
// Returns the token the remote teacher emitted.
Token serve_check(const RemoteTeacherConfig& config);

// Reference server used by tests and the bundled stub process.
enum class StubMode {
  Oracle,     // answers with oracle_token and acks feedback
  BadToken,   // answers every emit with a token outside the vocabulary
  Malformed,  // answers every emit with invalid JSON
  Silent,     // never answers
};
StubMode stub_mode_from_string(std::string_view name);

class StubTeacherServer {
 public:
  explicit StubTeacherServer(StubMode mode, const std::string& host = "127.0.0.1",
                             std::uint16_t port = 0);

  std::uint16_t port() const { return listener_.port(); }

  // Serves connections until stop() is called, or until the first
  // connection ends when `once` is true. Each connection gets its own
  // thread unless `once` is set.
  void serve(bool once);
  void stop();

  int connections_served() const { return served_; }

 private:
  void serve_connection(net::LineStream& stream);

  StubMode mode_;
  net::Listener listener_;
  std::atomic<bool> stop_{false};
  std::atomic<int> served_{0};
};

}  // namespace bifeedback
