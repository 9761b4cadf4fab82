#include "bifeedback/remote_teacher.hpp"

#include <iostream>
#include <thread>
#include <vector>

#include "bifeedback/errors.hpp"

namespace bifeedback {

std::string_view to_string(RemoteFallback f) {
  return f == RemoteFallback::Oracle ? "oracle" : "abort";
}

RemoteFallback remote_fallback_from_string(std::string_view name) {
  if (name == "oracle") return RemoteFallback::Oracle;
  if (name == "abort") return RemoteFallback::Abort;
  throw ConfigError("teacher.fallback must be 'oracle' or 'abort', got '" + std::string(name) +
                    "'");
}

RemoteTeacher::RemoteTeacher(RemoteTeacherConfig config)
    : config_(std::move(config)), endpoint_(net::Endpoint::parse(config_.endpoint)) {
  if (config_.timeout_ms <= 0) throw ConfigError("teacher.timeout_ms must be positive");
  ensure_connected();
}

RemoteTeacher::~RemoteTeacher() {
  try {
    shutdown();
  } catch (...) {
  }
}

void RemoteTeacher::ensure_connected() {
  if (!stream_.is_open()) {
    stream_ = net::LineStream::connect(endpoint_, std::chrono::milliseconds(config_.timeout_ms));
  }
}

void RemoteTeacher::shutdown() {
  if (stream_.is_open()) {
    stream_.write_line(protocol::encode(protocol::Shutdown{}));
    stream_.close();
  }
}

protocol::Message RemoteTeacher::exchange(const protocol::Message& request) {
  ensure_connected();
  stream_.write_line(protocol::encode(request));
  std::optional<std::string> line;
  try {
    line = stream_.read_line(std::chrono::milliseconds(config_.timeout_ms));
  } catch (const TimeoutError&) {
    stream_.close();
    throw;
  }
  if (!line) {
    stream_.close();
    throw ProtocolError("remote teacher closed the connection");
  }
  try {
    return protocol::decode(*line);
  } catch (const ProtocolError& e) {
    const std::string msg =
        "remote teacher sent an invalid message (" + std::string(e.what()) + "): " + *line + "\n";
    std::cerr << msg << std::flush;
    throw;
  }
}

Token RemoteTeacher::emit(const TeacherContext& ctx, std::int64_t episode, std::int64_t t,
                          SplitMix64&) {
  protocol::Message reply;
  try {
    reply = exchange(protocol::EmitRequest{ctx, episode, t});
  } catch (const TimeoutError&) {
    if (config_.fallback == RemoteFallback::Abort) throw;
    ++fallbacks_;
    return oracle_token(ctx);
  }
  if (const auto* tok = std::get_if<protocol::TokenResponse>(&reply)) return tok->token;
  throw ProtocolError("expected a token message in reply to emit, got: " +
                      protocol::encode(reply));
}

void RemoteTeacher::apply_feedback(const TeacherContext& ctx, Token token,
                                   FeedbackSignal signal) {
  protocol::Message reply;
  try {
    reply = exchange(protocol::FeedbackRequest{signal, ctx, token});
  } catch (const TimeoutError&) {
    if (config_.fallback == RemoteFallback::Abort) throw;
    ++fallbacks_;
    return;
  }
  if (!std::holds_alternative<protocol::Ack>(reply)) {
    throw ProtocolError("expected ack in reply to feedback, got: " + protocol::encode(reply));
  }
}

Token serve_check(const RemoteTeacherConfig& config) {
  RemoteTeacherConfig strict = config;
  strict.fallback = RemoteFallback::Abort;
  RemoteTeacher teacher(strict);
  SplitMix64 unused;
  const TeacherContext ctx{{Heading::Ahead, DistanceBucket::Far}};
  const Token token = teacher.emit(ctx, 0, 0, unused);
  teacher.apply_feedback(ctx, token, FeedbackSignal::Positive);
  teacher.shutdown();
  return token;
}

StubMode stub_mode_from_string(std::string_view name) {
  if (name == "oracle") return StubMode::Oracle;
  if (name == "bad-token") return StubMode::BadToken;
  if (name == "malformed") return StubMode::Malformed;
  if (name == "silent") return StubMode::Silent;
  throw ConfigError("unknown stub mode '" + std::string(name) + "'");
}

StubTeacherServer::StubTeacherServer(StubMode mode, const std::string& host, std::uint16_t port)
    : mode_(mode), listener_(host, port) {}

void StubTeacherServer::stop() { stop_ = true; }

void StubTeacherServer::serve(bool once) {
  std::vector<std::jthread> workers;
  while (!stop_) {
    auto conn = listener_.accept(std::chrono::milliseconds(50));
    if (!conn) continue;
    if (once) {
      serve_connection(*conn);
      ++served_;
      break;
    }
    workers.emplace_back([this, stream = std::move(*conn)]() mutable {
      serve_connection(stream);
      ++served_;
    });
  }
}

void StubTeacherServer::serve_connection(net::LineStream& stream) {
  while (!stop_) {
    std::optional<std::string> line;
    try {
      line = stream.read_line(std::chrono::milliseconds(50));
    } catch (const TimeoutError&) {
      continue;
    } catch (const ProtocolError&) {
      return;
    }
    if (!line) return;

    protocol::Message msg;
    try {
      msg = protocol::decode(*line);
    } catch (const ProtocolError& e) {
      std::cerr << "stub teacher: ignoring invalid message (" << e.what() << ")\n";
      continue;
    }
    try {
      if (const auto* emit = std::get_if<protocol::EmitRequest>(&msg)) {
        switch (mode_) {
          case StubMode::Oracle:
            stream.write_line(protocol::encode(protocol::TokenResponse{oracle_token(emit->ctx)}));
            break;
          case StubMode::BadToken:
            stream.write_line(R"({"type":"token","name":"jump"})");
            break;
          case StubMode::Malformed:
            stream.write_line(R"({"type":"token","name":)");
            break;
          case StubMode::Silent:
            break;
        }
      } else if (std::holds_alternative<protocol::FeedbackRequest>(msg)) {
        if (mode_ != StubMode::Silent) stream.write_line(protocol::encode(protocol::Ack{}));
      } else if (std::holds_alternative<protocol::Shutdown>(msg)) {
        return;
      }
    } catch (const ProtocolError&) {
      return;
    }
  }
}

}  // namespace bifeedback
