#include "bifeedback/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "bifeedback/checkpoint.hpp"
#include "bifeedback/errors.hpp"
#include "bifeedback/net.hpp"
#include "bifeedback/trace.hpp"
#include "bifeedback/version.hpp"

namespace bifeedback::cli {

namespace fs = std::filesystem;

namespace {

Setting split_assignment(const std::string& text) {
  const auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw UsageError("--set expects key=value, got '" + text + "'");
  }
  Setting s{text.substr(0, eq), text.substr(eq + 1)};
  if (!is_known_config_key(s.first)) throw UsageError("unknown config key '" + s.first + "'");
  return s;
}

std::vector<Setting> teacher_overrides(const std::string& choice) {
  if (choice == "oracle" || choice == "tabular") return {{"teacher.kind", choice}};
  constexpr std::string_view kRemote = "remote:";
  if (choice.rfind(kRemote, 0) == 0) {
    const std::string address = choice.substr(kRemote.size());
    try {
      net::Endpoint::parse(address);
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--teacher: ") + e.what());
    }
    return {{"teacher.kind", "remote"}, {"teacher.endpoint", address}};
  }
  throw UsageError("--teacher must be oracle, tabular or remote:HOST:PORT, got '" + choice + "'");
}

void write_manifest(const fs::path& path, const ExperimentConfig& config,
                    std::string_view subcommand) {
  nlohmann::json m;
  m["artifact"] = "bifeedback";
  m["version"] = kVersion;
  m["manifest_format"] = 1;
  m["subcommand"] = subcommand;
  m["config"] = config_to_json(config);
  m["seeds"] = config.seeds;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(path.string(), "cannot write manifest");
  out << m.dump(2) << '\n';
  if (!out) throw IoError(path.string(), "write failed");
}

void make_dirs(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), "cannot create directory: " + ec.message());
}

void print_final(const MetricsSeries& series, std::ostream& out) {
  if (series.aggregates.empty()) return;
  const AggregateRow& last = series.aggregates.back();
  out << last.condition << " after " << last.episode << " episodes over " << last.num_seeds
      << " seeds: success " << last.success_mean << " (std " << last.success_std
      << "), return " << last.return_mean << ", length " << last.length_mean << '\n';
}

int train(const RunSpec& spec, const ExperimentConfig& config, std::ostream& out) {
  const fs::path dir = spec.output_dir;
  make_dirs(dir);
  write_manifest(dir / "manifest.json", config, "train");

  RunOptions options;
  if (config.trace) {
    options.trace_dir = dir / "traces";
    make_dirs(*options.trace_dir);
  }

  ExperimentResult result;
  try {
    result = run_experiment(config, options);
  } catch (const ExperimentAborted& aborted) {
    write_csv(aborted.partial(), dir / "metrics.csv");
    emit_plot_data(aborted.partial(), dir / "plot.csv");
    std::rethrow_exception(aborted.cause());
  }

  write_csv(result.series, dir / "metrics.csv");
  emit_plot_data(result.series, dir / "plot.csv");
  make_dirs(dir / "checkpoints");
  for (const SeedOutcome& o : result.outcomes) {
    save_checkpoint(dir / "checkpoints" / ("seed_" + std::to_string(o.seed) + ".ckpt"),
                    *o.student, o.teacher ? &*o.teacher : nullptr);
  }
  print_final(result.series, out);
  out << "wrote " << (dir / "metrics.csv").string() << '\n';
  return kOk;
}

int evaluate(const RunSpec& spec, const ExperimentConfig& config, std::ostream& out) {
  if (!spec.checkpoint) throw ConfigError("evaluate requires --checkpoint");
  Checkpoint cp = load_checkpoint(*spec.checkpoint);
  if (cp.student.indexer().width() != config.env.width ||
      cp.student.indexer().height() != config.env.height) {
    throw ConfigError("checkpoint grid " + std::to_string(cp.student.indexer().width()) + "x" +
                      std::to_string(cp.student.indexer().height()) +
                      " does not match configured grid");
  }

  std::unique_ptr<Teacher> teacher;
  const bool learnable = config.condition == Condition::Bidirectional ||
                         config.condition == Condition::NoFeedback;
  if (learnable && config.teacher_kind == TeacherKind::Tabular) {
    if (!cp.teacher) throw ConfigError("checkpoint has no tabular teacher to evaluate with");
    teacher = std::make_unique<TabularTeacher>(*cp.teacher);
  } else {
    teacher = make_teacher(config);
  }

  const EvalResult r = evaluate_policy(config.env, config.env_seed, config.eval_episodes,
                                       cp.student, *teacher);
  nlohmann::json report = {{"checkpoint", *spec.checkpoint},
                           {"condition", to_string(config.condition)},
                           {"eval_episodes", config.eval_episodes},
                           {"success_rate", r.success_rate},
                           {"mean_return", r.mean_return},
                           {"mean_length", r.mean_length}};
  out << report.dump() << '\n';
  return kOk;
}

int replay(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  if (!spec.trace) throw ConfigError("replay requires --trace");
  std::vector<fs::path> files;
  const fs::path target = *spec.trace;
  if (fs::is_directory(target)) {
    for (const auto& entry : fs::directory_iterator(target)) {
      if (entry.path().extension() == ".jsonl") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    if (files.empty()) throw IoError(target.string(), "no .jsonl traces in directory");
  } else {
    files.push_back(target);
  }

  std::int64_t steps = 0;
  std::int64_t signals = 0;
  for (const fs::path& f : files) {
    const ReplayReport report = replay_trace(f);
    if (!report.ok()) {
      err << f.string() << ": " << *report.failure << '\n';
      return kVerificationFailed;
    }
    steps += report.steps_checked;
    signals += report.signals_checked;
  }
  out << "replay ok: " << steps << " steps, " << signals << " feedback signals verified in "
      << files.size() << " file(s)\n";
  return kOk;
}

int serve_check_cmd(const ExperimentConfig& config, std::ostream& out) {
  if (config.remote.endpoint.empty()) {
    throw ConfigError("serve-check needs --teacher remote:HOST:PORT or teacher.endpoint");
  }
  const Token token = serve_check(config.remote);
  out << "remote teacher at " << config.remote.endpoint << " ok (emitted " << to_string(token)
      << ")\n";
  return kOk;
}

}  // namespace

RunSpec parse_args(const std::vector<std::string>& args) {
  CLI::App app{"Teacher-student gridworld training with bi-directional feedback", "bifeedback"};
  app.require_subcommand(1, 1);

  RunSpec spec;
  std::string config_path, out_dir, condition, teacher, checkpoint, trace;
  std::optional<std::string> seeds;
  std::optional<std::int64_t> episodes;
  std::vector<std::string> sets;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Config file (TOML subset)");
    sub->add_option("--set", sets, "Override a config key: key=value (repeatable)")
        ->take_all()
        ->allow_extra_args(false);
    sub->add_option("--out", out_dir, "Output directory");
    sub->add_option("--condition", condition,
                    "bidirectional | no-feedback | oracle-teacher | no-teacher");
    sub->add_option("--episodes", episodes, "Training episodes per seed");
    sub->add_option("--seeds", seeds, "Comma-separated seed list");
    sub->add_option("--teacher", teacher, "oracle | tabular | remote:HOST:PORT");
  };

  CLI::App* train = app.add_subcommand("train", "Run an experiment and write metrics");
  CLI::App* evaluate = app.add_subcommand("evaluate", "Evaluate a checkpoint greedily");
  CLI::App* replay = app.add_subcommand("replay", "Re-verify feedback signs in a trace");
  CLI::App* serve = app.add_subcommand("serve-check", "Handshake with a remote teacher");
  for (CLI::App* sub : {train, evaluate, replay, serve}) add_common(sub);
  evaluate->add_option("--checkpoint", checkpoint, "Checkpoint written by train")->required();
  replay->add_option("--trace", trace, "Trace file or directory of traces")->required();

  // CLI11 consumes a reversed argument vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    throw HelpRequested(app.help());
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  if (*train) spec.subcommand = Subcommand::Train;
  if (*evaluate) spec.subcommand = Subcommand::Evaluate;
  if (*replay) spec.subcommand = Subcommand::Replay;
  if (*serve) spec.subcommand = Subcommand::ServeCheck;

  if (!config_path.empty()) spec.config_path = config_path;
  if (!out_dir.empty()) spec.output_dir = out_dir;
  if (!checkpoint.empty()) spec.checkpoint = checkpoint;
  if (!trace.empty()) spec.trace = trace;

  if (!condition.empty()) {
    try {
      condition_from_string(condition);
    } catch (const ConfigError& e) {
      throw UsageError(e.what());
    }
    spec.overrides.emplace_back("experiment.condition", condition);
  }
  if (episodes) spec.overrides.emplace_back("experiment.episodes", std::to_string(*episodes));
  if (seeds) {
    try {
      parse_seed_list(*seeds);
    } catch (const ConfigError& e) {
      throw UsageError(std::string("--seeds: ") + e.what());
    }
    spec.overrides.emplace_back("experiment.seeds", *seeds);
  }
  if (!teacher.empty()) {
    for (auto& s : teacher_overrides(teacher)) spec.overrides.push_back(std::move(s));
  }
  for (const std::string& s : sets) spec.overrides.push_back(split_assignment(s));
  return spec;
}

ExperimentConfig resolve_config(const RunSpec& spec) {
  ExperimentConfig config;
  if (spec.config_path) {
    for (const auto& [key, value] : parse_config_file(*spec.config_path)) {
      apply_setting(config, key, value);
    }
  }
  for (const auto& [key, value] : spec.overrides) apply_setting(config, key, value);
  return config;
}

int run(const RunSpec& spec, std::ostream& out, std::ostream& err) {
  try {
    if (spec.subcommand == Subcommand::Replay) return replay(spec, out, err);
    const ExperimentConfig config = resolve_config(spec);
    config.validate();
    switch (spec.subcommand) {
      case Subcommand::Train: return train(spec, config, out);
      case Subcommand::Evaluate: return evaluate(spec, config, out);
      case Subcommand::ServeCheck: return serve_check_cmd(config, out);
      case Subcommand::Replay: break;
    }
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const ProtocolError& e) {
    err << "protocol error: " << e.what() << '\n';
    return kProtocolError;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kVerificationFailed;
  }
  return kOk;
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  RunSpec spec;
  try {
    spec = parse_args(args);
  } catch (const HelpRequested& e) {
    out << e.what();
    return kOk;
  } catch (const UsageError& e) {
    err << e.what() << '\n';
    return kConfigError;
  }
  return run(spec, out, err);
}

}  // namespace bifeedback::cli
