#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace bifeedback::net {

struct Endpoint {
  std::string host;
  std::uint16_t port = 0;

  // Parses "host:port". Throws ConfigError on anything else.
  static Endpoint parse(std::string_view text);
  std::string str() const;
  friend bool operator==(const Endpoint&, const Endpoint&) = default;
};

// Owning TCP stream that exchanges newline-terminated lines.
class LineStream {
 public:
  LineStream() = default;
  explicit LineStream(int fd) : fd_(fd) {}
  ~LineStream();
  LineStream(LineStream&& other) noexcept;
  LineStream& operator=(LineStream&& other) noexcept;
  LineStream(const LineStream&) = delete;
  LineStream& operator=(const LineStream&) = delete;

  // Throws ProtocolError when the connection is refused, TimeoutError when
  // it is not established within `timeout`.
  static LineStream connect(const Endpoint& endpoint, std::chrono::milliseconds timeout);

  void write_line(std::string_view line);
  // Next line without its terminator, or nullopt at end of stream. Throws
  // TimeoutError when nothing complete arrives within `timeout`.
  std::optional<std::string> read_line(std::chrono::milliseconds timeout);

  bool is_open() const { return fd_ >= 0; }
  void close();

 private:
  int fd_ = -1;
  std::string buffer_;
};

// Listening TCP socket bound to a loopback or explicit address.
class Listener {
 public:
  // port 0 selects an ephemeral port.
  explicit Listener(const std::string& host = "127.0.0.1", std::uint16_t port = 0);
  ~Listener();
  Listener(const Listener&) = delete;
  Listener& operator=(const Listener&) = delete;

  std::uint16_t port() const { return port_; }
  // Blocks up to `timeout`; nullopt on timeout or after close().
  std::optional<LineStream> accept(std::chrono::milliseconds timeout);
  void close();

 private:
  int fd_ = -1;
  std::uint16_t port_ = 0;
};

}  // namespace bifeedback::net
