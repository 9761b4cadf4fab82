#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <stdexcept>

#include "bifeedback/config.hpp"
#include "bifeedback/errors.hpp"

namespace bifeedback::cli {

enum class Subcommand { Train, Evaluate, Replay, ServeCheck };

enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,  // replay found an inconsistent step
  kConfigError = 2,
  kProtocolError = 3,
  kIoError = 4,
};

struct RunSpec {
  Subcommand subcommand = Subcommand::Train;
  std::optional<std::string> config_path;
  // Applied after the config file, in order. Shortcut flags (--condition,
  // --episodes, --seeds, --teacher) are expanded here ahead of --set.
  std::vector<Setting> overrides;
  std::string output_dir = "out";
  std::optional<std::string> checkpoint;  // evaluate
  std::optional<std::string> trace;       // replay: file or directory
};

class UsageError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

// Carries the help text when --help is given.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// `args` excludes the program name. Throws UsageError for unknown flags, unknown keys in --set, or a
// malformed seed list.
RunSpec parse_args(const std::vector<std::string>& args);

// Defaults < config file < overrides. Throws ConfigError / IoError.
ExperimentConfig resolve_config(const RunSpec& spec);

// Executes a parsed spec. Never throws; failures map to ExitCode values.
int run(const RunSpec& spec, std::ostream& out, std::ostream& err);

// parse_args + run with usage errors mapped to kConfigError.
int main(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace bifeedback::cli
