#include "bifeedback/remote_teacher.hpp"

#include <gtest/gtest.h>

#include <thread>

#include "bifeedback/errors.hpp"

namespace bifeedback {
namespace {

// Runs a stub server on a background thread for the lifetime of the fixture.
class StubRunner {
 public:
  explicit StubRunner(StubMode mode) : server_(mode), thread_([this] { server_.serve(false); }) {}
  ~StubRunner() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const { return "127.0.0.1:" + std::to_string(server_.port()); }

 private:
  StubTeacherServer server_;
  std::thread thread_;
};

const TeacherContext kCtx{{Heading::Right, DistanceBucket::Near}};

TEST(EndpointTest, Parses) {
  EXPECT_EQ(net::Endpoint::parse("127.0.0.1:9000"), (net::Endpoint{"127.0.0.1", 9000}));
  EXPECT_EQ(net::Endpoint::parse("localhost:1").str(), "localhost:1");
  for (const char* bad : {"", "host", ":80", "host:", "host:abc", "host:70000", "host:0"}) {
    EXPECT_THROW(net::Endpoint::parse(bad), ConfigError) << bad;
  }
}

TEST(RemoteTeacherTest, OracleStubAnswersAndAcks) {
  StubRunner stub(StubMode::Oracle);
  RemoteTeacher teacher({stub.endpoint(), 2000, RemoteFallback::Abort});
  SplitMix64 rng(1);
  for (int c = 0; c < kNumContexts; ++c) {
    const auto ctx = context_from_index(c);
    EXPECT_EQ(teacher.emit(ctx, 0, c, rng), oracle_token(ctx));
    teacher.apply_feedback(ctx, oracle_token(ctx), FeedbackSignal::Positive);
  }
  EXPECT_EQ(teacher.fallbacks_used(), 0);
  teacher.shutdown();
}

TEST(RemoteTeacherTest, ServeCheckSucceeds) {
  StubRunner stub(StubMode::Oracle);
  EXPECT_EQ(serve_check({stub.endpoint(), 2000, RemoteFallback::Oracle}), Token::GoForward);
}

TEST(RemoteTeacherTest, BadTokenIsProtocolError) {
  StubRunner stub(StubMode::BadToken);
  RemoteTeacher teacher({stub.endpoint(), 2000, RemoteFallback::Oracle});
  SplitMix64 rng(1);
  EXPECT_THROW(teacher.emit(kCtx, 0, 0, rng), ProtocolError);
  EXPECT_THROW(serve_check({stub.endpoint(), 2000, RemoteFallback::Oracle}), ProtocolError);
}

TEST(RemoteTeacherTest, MalformedReplyIsProtocolError) {
  StubRunner stub(StubMode::Malformed);
  RemoteTeacher teacher({stub.endpoint(), 2000, RemoteFallback::Oracle});
  SplitMix64 rng(1);
  EXPECT_THROW(teacher.emit(kCtx, 0, 0, rng), ProtocolError);
}

TEST(RemoteTeacherTest, TimeoutFallsBackToOracle) {
  StubRunner stub(StubMode::Silent);
  RemoteTeacher teacher({stub.endpoint(), 100, RemoteFallback::Oracle});
  SplitMix64 rng(1);
  EXPECT_EQ(teacher.emit(kCtx, 0, 0, rng), Token::TurnRight);
  EXPECT_EQ(teacher.fallbacks_used(), 1);
  EXPECT_EQ(teacher.emit(kCtx, 0, 1, rng), Token::TurnRight);
  EXPECT_EQ(teacher.fallbacks_used(), 2);
}

TEST(RemoteTeacherTest, TimeoutAbortsWhenConfigured) {
  StubRunner stub(StubMode::Silent);
  RemoteTeacher teacher({stub.endpoint(), 100, RemoteFallback::Abort});
  SplitMix64 rng(1);
  EXPECT_THROW(teacher.emit(kCtx, 0, 0, rng), TimeoutError);
}

TEST(RemoteTeacherTest, RefusedConnectionIsProtocolError) {
  std::uint16_t port;
  {
    net::Listener probe;
    port = probe.port();
  }
  EXPECT_THROW(
      RemoteTeacher({"127.0.0.1:" + std::to_string(port), 500, RemoteFallback::Abort}),
      ProtocolError);
}

}  // namespace
}  // namespace bifeedback
