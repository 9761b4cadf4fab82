#pragma once

#include <stdexcept>
#include <string>

namespace bifeedback {

// Invalid configuration values, unknown keys, malformed command lines.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operation invoked in a state that does not allow it (e.g. stepping a
// finished episode).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Remote teacher misbehaved: malformed message, unknown token, timeout,
// connection failure.
class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TimeoutError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// File I/O failure. The message always carries the offending path.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace bifeedback
