#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "bifeedback/harness.hpp"

namespace bifeedback {

// Configuration is a flat tree of dotted keys, one per tunable:
//
//   env.grid_width  env.grid_height  env.max_steps  env.env_seed
//   teacher.kind  teacher.beta  teacher.temperature
//   teacher.endpoint  teacher.timeout_ms  teacher.fallback
//   student.alpha  student.gamma  student.epsilon_start
//   student.epsilon_end  student.epsilon_decay_fraction
//   experiment.condition  experiment.episodes  experiment.seeds
//   experiment.eval_every  experiment.eval_episodes  experiment.threads
//   experiment.trace
//
// Config files use a TOML subset (format version 1):
//
//   version = 1            # optional; any other value is rejected
//   [student]
//   alpha = 0.05
//   [experiment]
//   seeds = [1, 2, 3]
//   condition = "no-feedback"
//
// Dotted keys may also appear outside a section. Strings may be quoted or
// bare; '#' starts a comment.
inline constexpr int kConfigFormatVersion = 1;

using Setting = std::pair<std::string, std::string>;

const std::vector<std::string>& known_config_keys();
bool is_known_config_key(std::string_view key);

// Throws ConfigError naming the key on an unknown key or a bad value.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

// Current value of `key` rendered in the same syntax apply_setting accepts.
std::string get_setting(const ExperimentConfig& config, std::string_view key);

// Throws ConfigError with a line number on syntax errors, IoError when the
// file cannot be read.
std::vector<Setting> parse_config_file(const std::filesystem::path& path);
std::vector<Setting> parse_config_text(std::string_view text);

// Parses "1,2,3" (whitespace tolerated). Throws ConfigError.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);

// Every key with its resolved value.
nlohmann::json config_to_json(const ExperimentConfig& config);

}  // namespace bifeedback
