#include "bifeedback/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include "bifeedback/errors.hpp"

namespace bifeedback {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("invalid value '" + std::string(value) + "' for " + std::string(key) +
                    " (expected " + expected + ")");
}

template <class T>
T parse_integer(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc{} || ptr != value.data() + value.size()) bad_value(key, value, "an integer");
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  const std::string text(value);
  char* end = nullptr;
  const double out = std::strtod(text.c_str(), &end);
  if (text.empty() || end != text.c_str() + text.size()) bad_value(key, value, "a number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  bad_value(key, value, "true or false");
}

std::string render(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct Entry {
  std::string key;
  std::function<void(ExperimentConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

template <class T>
Entry int_entry(std::string key, T ExperimentConfig::*field) {
  return {std::move(key),
          [field](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*field = parse_integer<T>(k, v);
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

template <class Sub, class T>
Entry nested_int(std::string key, Sub ExperimentConfig::*sub, T Sub::*field) {
  return {std::move(key),
          [sub, field](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*sub.*field = parse_integer<T>(k, v);
          },
          [sub, field](const ExperimentConfig& c) { return std::to_string(c.*sub.*field); }};
}

template <class Sub>
Entry nested_real(std::string key, Sub ExperimentConfig::*sub, double Sub::*field) {
  return {std::move(key),
          [sub, field](ExperimentConfig& c, std::string_view k, std::string_view v) {
            c.*sub.*field = parse_real(k, v);
          },
          [sub, field](const ExperimentConfig& c) { return render(c.*sub.*field); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> kEntries = [] {
    std::vector<Entry> e;
    e.push_back(nested_int("env.grid_width", &ExperimentConfig::env, &GridConfig::width));
    e.push_back(nested_int("env.grid_height", &ExperimentConfig::env, &GridConfig::height));
    e.push_back(nested_int("env.max_steps", &ExperimentConfig::env, &GridConfig::max_steps));
    e.push_back(int_entry("env.env_seed", &ExperimentConfig::env_seed));

    e.push_back({"teacher.kind",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) {
                   c.teacher_kind = teacher_kind_from_string(v);
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.teacher_kind)); }});
    e.push_back(nested_real("teacher.beta", &ExperimentConfig::teacher, &TeacherConfig::beta));
    e.push_back(nested_real("teacher.temperature", &ExperimentConfig::teacher,
                            &TeacherConfig::temperature));
    e.push_back({"teacher.endpoint",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) {
                   c.remote.endpoint = std::string(v);
                 },
                 [](const ExperimentConfig& c) { return c.remote.endpoint; }});
    e.push_back(nested_int("teacher.timeout_ms", &ExperimentConfig::remote,
                           &RemoteTeacherConfig::timeout_ms));
    e.push_back({"teacher.fallback",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) {
                   c.remote.fallback = remote_fallback_from_string(v);
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.remote.fallback)); }});

    e.push_back(nested_real("student.alpha", &ExperimentConfig::student, &StudentConfig::alpha));
    e.push_back(nested_real("student.gamma", &ExperimentConfig::student, &StudentConfig::gamma));
    e.push_back(nested_real("student.epsilon_start", &ExperimentConfig::student,
                            &StudentConfig::epsilon_start));
    e.push_back(nested_real("student.epsilon_end", &ExperimentConfig::student,
                            &StudentConfig::epsilon_end));
    e.push_back(nested_real("student.epsilon_decay_fraction", &ExperimentConfig::student,
                            &StudentConfig::epsilon_decay_fraction));

    e.push_back({"experiment.condition",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) {
                   c.condition = condition_from_string(v);
                 },
                 [](const ExperimentConfig& c) { return std::string(to_string(c.condition)); }});
    e.push_back(int_entry("experiment.episodes", &ExperimentConfig::episodes));
    e.push_back({"experiment.seeds",
                 [](ExperimentConfig& c, std::string_view, std::string_view v) {
                   c.seeds = parse_seed_list(v);
                 },
                 [](const ExperimentConfig& c) {
                   std::string out;
                   for (std::size_t i = 0; i < c.seeds.size(); ++i) {
                     if (i > 0) out += ',';
                     out += std::to_string(c.seeds[i]);
                   }
                   return out;
                 }});
    e.push_back(int_entry("experiment.eval_every", &ExperimentConfig::eval_every));
    e.push_back(int_entry("experiment.eval_episodes", &ExperimentConfig::eval_episodes));
    e.push_back(int_entry("experiment.threads", &ExperimentConfig::threads));
    e.push_back({"experiment.trace",
                 [](ExperimentConfig& c, std::string_view k, std::string_view v) {
                   c.trace = parse_bool(k, v);
                 },
                 [](const ExperimentConfig& c) { return std::string(c.trace ? "true" : "false"); }});
    return e;
  }();
  return kEntries;
}

const Entry* find_entry(std::string_view key) {
  for (const Entry& e : entries()) {
    if (e.key == key) return &e;
  }
  return nullptr;
}

// Strips quotes from a scalar, flattens "[1, 2, 3]" to "1,2,3".
std::string normalize_value(std::string_view raw, int line_no) {
  std::string_view v = trim(raw);
  if (v.size() >= 2 && v.front() == '"') {
    if (v.back() != '"') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    }
    return std::string(v.substr(1, v.size() - 2));
  }
  if (!v.empty() && v.front() == '[') {
    if (v.back() != ']') {
      throw ConfigError("line " + std::to_string(line_no) + ": unterminated array");
    }
    std::string out;
    std::string_view body = v.substr(1, v.size() - 2);
    while (!body.empty()) {
      const auto comma = body.find(',');
      std::string_view item = trim(body.substr(0, comma));
      if (!item.empty()) {
        if (!out.empty()) out += ',';
        out += item;
      }
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return out;
  }
  return std::string(v);
}

}  // namespace

const std::vector<std::string>& known_config_keys() {
  static const std::vector<std::string> kKeys = [] {
    std::vector<std::string> keys;
    for (const Entry& e : entries()) keys.push_back(e.key);
    return keys;
  }();
  return kKeys;
}

bool is_known_config_key(std::string_view key) { return find_entry(key) != nullptr; }

void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value) {
  const Entry* entry = find_entry(key);
  if (entry == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    entry->set(config, key, value);
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    if (what.find(std::string(key)) != std::string::npos) throw;
    throw ConfigError(std::string(key) + ": " + what);
  }
}

std::string get_setting(const ExperimentConfig& config, std::string_view key) {
  const Entry* entry = find_entry(key);
  if (entry == nullptr) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return entry->get(config);
}

std::vector<Setting> parse_config_text(std::string_view text) {
  std::vector<Setting> out;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  for (std::string raw; std::getline(in, raw);) {
    ++line_no;
    std::string_view line = raw;
    bool in_string = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') in_string = !in_string;
      if (line[i] == '#' && !in_string) {
        line = line.substr(0, i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string_view name = trim(line.substr(0, eq));
    if (name.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    std::string value = normalize_value(line.substr(eq + 1), line_no);

    if (section.empty() && name == "version") {
      if (value != std::to_string(kConfigFormatVersion)) {
        throw ConfigError("line " + std::to_string(line_no) + ": unsupported config version " +
                          value);
      }
      continue;
    }
    std::string key = section.empty() ? std::string(name) : section + "." + std::string(name);
    if (!is_known_config_key(key)) {
      throw ConfigError("line " + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    out.emplace_back(std::move(key), std::move(value));
  }
  return out;
}

std::vector<Setting> parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot read config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config_text(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

std::vector<std::uint64_t> parse_seed_list(std::string_view text) {
  std::vector<std::uint64_t> seeds;
  std::string_view rest = text;
  for (;;) {
    const auto comma = rest.find(',');
    const std::string_view item = trim(rest.substr(0, comma));
    seeds.push_back(parse_integer<std::uint64_t>("experiment.seeds", item));
    if (comma == std::string_view::npos) break;
    rest.remove_prefix(comma + 1);
  }
  return seeds;
}

nlohmann::json config_to_json(const ExperimentConfig& config) {
  nlohmann::json out = nlohmann::json::object();
  for (const Entry& e : entries()) out[e.key] = e.get(config);
  return out;
}

}  // namespace bifeedback
