#include "bifeedback/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bifeedback/errors.hpp"
#include "bifeedback/trace.hpp"

namespace bifeedback {

namespace {

constexpr std::uint64_t kTrainStream = 0x7472616E;    // "tran"
constexpr std::uint64_t kEvalStream = 0x6576616C;     // "eval"
constexpr std::uint64_t kTeacherStream = 0x74636872;  // "tchr"
constexpr std::uint64_t kStudentStream = 0x73747564;  // "stud"

constexpr std::array<std::string_view, 4> kConditionNames{"bidirectional", "no-feedback",
                                                          "oracle-teacher", "no-teacher"};

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string_view to_string(Condition c) { return kConditionNames[static_cast<int>(c)]; }

Condition condition_from_string(std::string_view name) {
  for (std::size_t i = 0; i < kConditionNames.size(); ++i) {
    if (kConditionNames[i] == name) return static_cast<Condition>(i);
  }
  throw ConfigError("unknown condition '" + std::string(name) +
                    "' (expected bidirectional, no-feedback, oracle-teacher or no-teacher)");
}

std::string_view to_string(TeacherKind k) {
  switch (k) {
    case TeacherKind::Tabular: return "tabular";
    case TeacherKind::Oracle: return "oracle";
    case TeacherKind::Remote: return "remote";
  }
  return "tabular";
}

TeacherKind teacher_kind_from_string(std::string_view name) {
  if (name == "tabular") return TeacherKind::Tabular;
  if (name == "oracle") return TeacherKind::Oracle;
  if (name == "remote") return TeacherKind::Remote;
  throw ConfigError("teacher.kind must be tabular, oracle or remote, got '" + std::string(name) +
                    "'");
}

void ExperimentConfig::validate() const {
  env.validate();
  teacher.validate();
  student.validate();
  if (episodes <= 0) throw ConfigError("experiment.episodes must be positive");
  if (eval_every <= 0 || eval_every > episodes) {
    throw ConfigError("experiment.eval_every must lie in [1, episodes]");
  }
  if (eval_episodes <= 0) throw ConfigError("experiment.eval_episodes must be positive");
  if (threads < 0) throw ConfigError("experiment.threads must be non-negative");
  if (seeds.empty()) throw ConfigError("experiment.seeds must not be empty");
  if (std::set<std::uint64_t>(seeds.begin(), seeds.end()).size() != seeds.size()) {
    throw ConfigError("experiment.seeds must be distinct");
  }
  if (teacher_kind == TeacherKind::Remote && remote.endpoint.empty() &&
      (condition == Condition::Bidirectional || condition == Condition::NoFeedback)) {
    throw ConfigError("teacher.kind = remote requires teacher.endpoint");
  }
}

bool ExperimentConfig::feedback_enabled() const {
  return condition == Condition::Bidirectional || condition == Condition::OracleTeacher;
}

std::uint64_t eval_episode_seed(std::uint64_t env_seed, int i) {
  return derive_seed(derive_seed(env_seed, kEvalStream), static_cast<std::uint64_t>(i));
}

std::uint64_t train_episode_seed(std::uint64_t env_seed, std::uint64_t run_seed,
                                 std::int64_t episode) {
  return derive_seed(derive_seed(derive_seed(env_seed, kTrainStream), run_seed),
                     static_cast<std::uint64_t>(episode));
}

EvalResult evaluate_policy(const GridConfig& grid, std::uint64_t env_seed, int eval_episodes,
                           const StudentPolicy& student, Teacher& teacher) {
  GridWorld env(grid);
  const double gamma = student.config().gamma;
  EvalResult result;
  for (int i = 0; i < eval_episodes; ++i) {
    const std::uint64_t seed = eval_episode_seed(env_seed, i);
    SplitMix64 teacher_rng(derive_seed(seed, kTeacherStream));
    Observation obs = env.reset(seed);
    double discount = 1.0;
    double ret = 0.0;
    std::int64_t t = 0;
    bool success = false;
    while (!env.done()) {
      const TeacherContext ctx{relative_goal(obs)};
      const Token token = teacher.emit_greedy(ctx, -1 - i, t, teacher_rng);
      const Action action = student.greedy_action(student.indexer().key(obs), token);
      const StepOutcome out = env.step(action);
      ret += discount * out.reward;
      discount *= gamma;
      success = out.terminated;
      obs = out.observation;
      ++t;
    }
    result.success_rate += success ? 1.0 : 0.0;
    result.mean_return += ret;
    result.mean_length += static_cast<double>(env.step_count());
  }
  result.success_rate /= eval_episodes;
  result.mean_return /= eval_episodes;
  result.mean_length /= eval_episodes;
  return result;
}

std::unique_ptr<Teacher> make_teacher(const ExperimentConfig& config) {
  switch (config.condition) {
    case Condition::OracleTeacher: return std::make_unique<OracleTeacher>();
    case Condition::NoTeacher: return std::make_unique<ConstantTeacher>(Token::Explore);
    case Condition::Bidirectional:
    case Condition::NoFeedback: break;
  }
  switch (config.teacher_kind) {
    case TeacherKind::Tabular: return std::make_unique<TabularTeacher>(config.teacher);
    case TeacherKind::Oracle: return std::make_unique<OracleTeacher>();
    case TeacherKind::Remote: return std::make_unique<RemoteTeacher>(config.remote);
  }
  return nullptr;
}

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed,
                     std::vector<MetricsRow>& rows, const RecordSink& sink) {
  std::unique_ptr<Teacher> teacher = make_teacher(config);
  auto* tabular = dynamic_cast<TabularTeacher*>(teacher.get());

  SeedOutcome outcome;
  outcome.seed = seed;
  if (tabular != nullptr) outcome.initial_teacher = tabular->policy();

  GridWorld env(config.env);
  auto student = std::make_shared<StudentPolicy>(
      StateIndexer(config.env.width, config.env.height), config.student);
  SplitMix64 teacher_rng(derive_seed(seed, kTeacherStream));
  SplitMix64 student_rng(derive_seed(seed, kStudentStream));
  LoopState state;
  state.feedback_enabled = config.feedback_enabled();
  const LoopParts parts{env, *teacher, *student, teacher_rng, student_rng};
  const std::string condition(to_string(config.condition));

  for (std::int64_t ep = 0; ep < config.episodes; ++ep) {
    state.episode = ep;
    const double epsilon = config.student.epsilon_at(ep, config.episodes);
    run_episode(parts, state, train_episode_seed(config.env_seed, seed, ep), epsilon, sink);

    if ((ep + 1) % config.eval_every == 0) {
      const EvalResult r =
          evaluate_policy(config.env, config.env_seed, config.eval_episodes, *student, *teacher);
      rows.push_back({condition, seed, ep + 1, r.success_rate, r.mean_return, r.mean_length});
    }
  }

  if (auto* remote = dynamic_cast<RemoteTeacher*>(teacher.get())) remote->shutdown();
  if (tabular != nullptr) outcome.teacher = tabular->policy();
  outcome.student = std::move(student);
  return outcome;
}

std::vector<AggregateRow> aggregate(const std::vector<MetricsRow>& rows) {
  // (condition, episode) -> seed -> row; std::map keeps both levels sorted.
  std::map<std::pair<std::string, std::int64_t>, std::map<std::uint64_t, const MetricsRow*>>
      groups;
  for (const MetricsRow& r : rows) groups[{r.condition, r.episode}][r.seed] = &r;

  std::vector<AggregateRow> out;
  for (const auto& [key, by_seed] : groups) {
    AggregateRow a;
    a.condition = key.first;
    a.episode = key.second;
    a.num_seeds = static_cast<int>(by_seed.size());
    const double n = static_cast<double>(by_seed.size());
    auto mean_std = [&](double MetricsRow::*field, double& mean, double& sd) {
      double sum = 0.0;
      for (const auto& [seed, r] : by_seed) sum += r->*field;
      mean = sum / n;
      double ss = 0.0;
      for (const auto& [seed, r] : by_seed) ss += (r->*field - mean) * (r->*field - mean);
      sd = std::sqrt(ss / n);
    };
    mean_std(&MetricsRow::success_rate, a.success_mean, a.success_std);
    mean_std(&MetricsRow::mean_return, a.return_mean, a.return_std);
    mean_std(&MetricsRow::mean_length, a.length_mean, a.length_std);
    out.push_back(std::move(a));
  }
  return out;
}

std::string trace_file_name(std::uint64_t seed) {
  return "trace_seed_" + std::to_string(seed) + ".jsonl";
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  config.validate();
  const std::size_t n = config.seeds.size();
  std::vector<std::vector<MetricsRow>> rows(n);
  std::vector<SeedOutcome> outcomes(n);
  std::vector<std::exception_ptr> errors(n);
  if (options.trace_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.trace_dir, ec);
    if (ec) throw IoError(options.trace_dir->string(), ec.message());
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        std::optional<TraceWriter> trace;
        RecordSink sink;
        if (options.trace_dir) {
          trace.emplace(*options.trace_dir / trace_file_name(config.seeds[i]), config.seeds[i]);
          sink = [&trace](const StepRecord& rec) { trace->write(rec); };
        }
        outcomes[i] = run_seed(config, config.seeds[i], rows[i], sink);
        if (trace) trace->close();
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  ExperimentResult result;
  for (auto& r : rows) result.series.rows.insert(result.series.rows.end(), r.begin(), r.end());
  result.series.aggregates = aggregate(result.series.rows);

  for (std::size_t i = 0; i < n; ++i) {
    if (!errors[i]) continue;
    std::string what = "seed " + std::to_string(config.seeds[i]) + " failed";
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      what += ": ";
      what += e.what();
    } catch (...) {
    }
    throw ExperimentAborted(std::move(result.series), errors[i], what);
  }
  result.outcomes = std::move(outcomes);
  return result;
}

void write_csv(const MetricsSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "condition,seed,episode,success_rate,mean_return,mean_length\n";
  for (const MetricsRow& r : series.rows) {
    out << r.condition << ',' << r.seed << ',' << r.episode << ',' << format_double(r.success_rate)
        << ',' << format_double(r.mean_return) << ',' << format_double(r.mean_length) << '\n';
  }
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

std::vector<MetricsRow> read_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(path.string(), "cannot open for reading");
  std::string line;
  if (!std::getline(in, line) ||
      line != "condition,seed,episode,success_rate,mean_return,mean_length") {
    throw IoError(path.string(), "missing or unexpected CSV header");
  }
  std::vector<MetricsRow> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) cells.push_back(cell);
    if (cells.size() != 6) {
      throw IoError(path.string(), "line " + std::to_string(line_no) + ": expected 6 columns");
    }
    try {
      rows.push_back({cells[0], std::stoull(cells[1]), std::stoll(cells[2]), std::stod(cells[3]),
                      std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::logic_error&) {
      throw IoError(path.string(), "line " + std::to_string(line_no) + ": bad number");
    }
  }
  return rows;
}

void emit_plot_data(const MetricsSeries& series, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << "condition,episode,seeds,success_mean,success_std,return_mean,return_std,length_mean,"
         "length_std\n";
  for (const AggregateRow& a : series.aggregates) {
    out << a.condition << ',' << a.episode << ',' << a.num_seeds << ','
        << format_double(a.success_mean) << ',' << format_double(a.success_std) << ','
        << format_double(a.return_mean) << ',' << format_double(a.return_std) << ','
        << format_double(a.length_mean) << ',' << format_double(a.length_std) << '\n';
  }
  out.close();
  if (!out) throw IoError(path.string(), "write failed");
}

}  // namespace bifeedback
