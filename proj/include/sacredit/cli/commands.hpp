// Copyright 2026 The Sacredit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SACREDIT_CLI_COMMANDS_HPP_
#define SACREDIT_CLI_COMMANDS_HPP_

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "sacredit/cli/analysis.hpp"
#include "sacredit/cli/presets.hpp"
#include "sacredit/errors.hpp"
#include "sacredit/runtime/checkpoint.hpp"
#include "sacredit/runtime/config.hpp"
#include "sacredit/runtime/trainer.hpp"

namespace sacredit::cli {

inline constexpr int kExitUsage = 2;
inline constexpr int kExitFailure = 1;

struct TrainArgs {
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::string sr;  // "on", "off" or empty
  std::optional<double> alpha;
  std::optional<double> beta;
  std::optional<std::int64_t> steps;
  std::string out_dir;
  std::string config;
  bool deterministic = false;
  std::optional<int> actors;
  std::string resume;
  bool quiet = false;
};

// Preset, then override file, then SACREDIT_* variables, then flags.
inline runtime::ExperimentConfig build_train_config(const TrainArgs& a,
                                                    const std::function<const char*(const std::string&)>& env) {
  runtime::ExperimentConfig cfg = find_preset(a.preset).config;
  if (!a.config.empty()) runtime::apply_config_file(cfg, a.config);
  runtime::apply_env_overrides(cfg, env);
  if (a.sr == "on") cfg.sr_enabled = true;
  if (a.sr == "off") {
    if (a.alpha || a.beta) throw UsageError("--alpha/--beta need the SR module (--sr on)");
    cfg.sr_enabled = false;
  }
  if (a.seed) cfg.run.seed = *a.seed;
  if (a.alpha) cfg.sr.alpha = *a.alpha;
  if (a.beta) cfg.sr.beta = *a.beta;
  if (a.steps) cfg.run.total_steps = *a.steps;
  if (a.actors) cfg.run.actors = *a.actors;
  if (a.deterministic) cfg.run.deterministic = true;
  cfg.validate();
  return cfg;
}

inline std::string default_run_dir(const TrainArgs& a, const runtime::ExperimentConfig& cfg) {
  return "runs/" + a.preset + (cfg.sr_enabled ? "-sr" : "-base") + "-seed" + std::to_string(cfg.run.seed);
}

inline int cmd_train(const TrainArgs& a, std::ostream& out,
                     const std::function<const char*(const std::string&)>& env) {
  const runtime::ExperimentConfig cfg = build_train_config(a, env);
  runtime::TrainOptions opts;
  opts.out_dir = a.out_dir.empty() ? default_run_dir(a, cfg) : a.out_dir;
  opts.verbose = !a.quiet;
  std::optional<runtime::Checkpoint> resume;
  if (!a.resume.empty()) {
    resume = runtime::load_checkpoint(a.resume);
    opts.resume = &*resume;
  }
  const auto r = runtime::run_training(cfg, opts);
  out << "run directory: " << opts.out_dir << '\n'
      << "environment steps: " << r.env_steps << "  learner steps: " << r.learner_steps << "  seconds: "
      << runtime::format_metric(r.seconds) << '\n';
  if (!r.metrics.rows.empty()) {
    const auto& last = r.metrics.rows.back();
    for (std::size_t i = 0; i < r.metrics.header.size(); ++i) {
      const auto& h = r.metrics.header[i];
      if (h == "mean_return" || h.rfind("mean_", 0) == 0) out << h << ": " << runtime::format_metric(last[i]) << '\n';
    }
  }
  return 0;
}

struct EvalArgs {
  std::string checkpoint;
  std::string config;  // task overrides
  int episodes = 100;
  std::uint64_t seed = 12345;
  bool greedy = false;
  std::string out_dir;
};

inline int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
  const auto ck = runtime::load_checkpoint(a.checkpoint);
  runtime::ExperimentConfig cfg;
  runtime::apply_config_text(cfg, ck.blob("config"));
  if (!a.config.empty()) runtime::apply_config_file(cfg, a.config);
  runtime::EvalOptions opts;
  opts.episodes = a.episodes;
  opts.seed = a.seed;
  opts.greedy = a.greedy;
  opts.traces = !a.out_dir.empty();
  const auto r = runtime::evaluate(ck, cfg.task, opts);
  runtime::write_csv(r.metrics, out);
  if (!a.out_dir.empty()) {
    fs::create_directories(a.out_dir);
    std::ofstream m(fs::path(a.out_dir) / "eval_metrics.csv");
    runtime::write_csv(r.metrics, m);
    if (!r.traces.empty()) {
      std::ofstream t(fs::path(a.out_dir) / "traces.jsonl");
      for (const auto& tr : r.traces) sr::write_sr_trace_jsonl(tr, t);
      std::ofstream c(fs::path(a.out_dir) / "config.json");
      c << runtime::config_to_json(cfg).dump(2) << '\n';
    }
  }
  return 0;
}

struct AnalyzeArgs {
  std::string run_dir;
  std::string out_dir;
  std::size_t last = 0;
};

inline int cmd_analyze(const AnalyzeArgs& a, std::ostream& out) {
  const auto report = analyze_run(a.run_dir, a.last);
  const fs::path dest = a.out_dir.empty() ? fs::path(a.run_dir) / "analysis" : fs::path(a.out_dir);
  write_report(report, dest);
  out << "episodes analysed: " << report.episodes << '\n';
  if (report.contrast) {
    out << "trigger c: " << runtime::format_metric(report.contrast->trigger_c)
        << "  other positions: " << runtime::format_metric(report.contrast->others_c)
        << "  ratio: " << runtime::format_metric(report.contrast->ratio) << '\n';
  }
  for (const auto& e : report.events) {
    out << e.tag << ": n=" << e.event.n << " difference=" << runtime::format_metric(e.difference())
        << " z=" << runtime::format_metric(e.z()) << '\n';
  }
  out << "reports written to " << dest.string() << '\n';
  return 0;
}

struct CompareArgs {
  std::vector<std::string> runs;  // condition=dir
  std::vector<std::string> metrics;
  std::string out;
};

inline int cmd_compare(const CompareArgs& a, std::ostream& out) {
  std::vector<std::pair<std::string, fs::path>> dirs;
  for (const auto& spec : a.runs) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw UsageError("--run expects CONDITION=RUN_DIR, got '" + spec + "'");
    }
    dirs.emplace_back(spec.substr(0, eq), spec.substr(eq + 1));
  }
  const auto points = compare_curves(load_runs(dirs), a.metrics);
  if (a.out.empty()) {
    write_curves_csv(points, out);
  } else {
    std::ofstream f(a.out);
    if (!f) throw FormatError("cannot write " + a.out);
    write_curves_csv(points, f);
  }
  return 0;
}

// Parses and runs one command line; returns the process exit code.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr,
                   const std::function<const char*(const std::string&)>& env = [](const std::string& n) {
                     return std::getenv(n.c_str());
                   }) {
  CLI::App app{"Synthetic-return actor-critic experiments"};
  app.require_subcommand(1);

  TrainArgs ta;
  auto* train = app.add_subcommand("train", "train an agent from a preset");
  train->add_option("--preset", ta.preset, "preset name")->required()->check(CLI::IsMember(preset_names()));
  train->add_option("--seed", ta.seed, "run seed");
  train->add_option("--sr", ta.sr, "synthetic-return module")->check(CLI::IsMember({"on", "off"}));
  train->add_option("--alpha", ta.alpha, "weight of the synthetic return");
  train->add_option("--beta", ta.beta, "weight of the environment reward");
  train->add_option("--steps", ta.steps, "environment-step budget");
  train->add_option("--out-dir", ta.out_dir, "run directory");
  train->add_option("--config", ta.config, "key = value override file")->check(CLI::ExistingFile);
  train->add_flag("--deterministic", ta.deterministic, "one synchronous actor");
  train->add_option("--actors", ta.actors, "actor threads");
  train->add_option("--resume", ta.resume, "checkpoint to continue from")->check(CLI::ExistingFile);
  train->add_flag("--quiet", ta.quiet, "no progress lines");

  EvalArgs ea;
  auto* eval = app.add_subcommand("evaluate", "roll out a checkpointed policy");
  eval->add_option("--checkpoint", ea.checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--config", ea.config, "task overrides")->check(CLI::ExistingFile);
  eval->add_option("--episodes", ea.episodes, "episodes to run");
  eval->add_option("--seed", ea.seed, "evaluation seed");
  eval->add_flag("--greedy", ea.greedy, "take the most likely action");
  eval->add_option("--out-dir", ea.out_dir, "write metrics and SR traces here");

  AnalyzeArgs aa;
  auto* analyze = app.add_subcommand("analyze-sr", "summarise SR traces of a run");
  analyze->add_option("run_dir", aa.run_dir, "run directory")->required()->check(CLI::ExistingDirectory);
  analyze->add_option("--out-dir", aa.out_dir, "report directory (default RUN_DIR/analysis)");
  analyze->add_option("--last", aa.last, "only the most recent N traced episodes");

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "merge learning curves of several runs");
  compare->add_option("--run", ca.runs, "CONDITION=RUN_DIR, repeatable")->required();
  compare->add_option("--metric", ca.metrics, "metric columns (default all)");
  compare->add_option("--out", ca.out, "output CSV (default stdout)");

  auto* list = app.add_subcommand("presets", "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : kExitUsage;
  }
  try {
    if (*train) return cmd_train(ta, out, env);
    if (*eval) return cmd_evaluate(ea, out);
    if (*analyze) return cmd_analyze(aa, out);
    if (*compare) return cmd_compare(ca, out);
    if (*list) {
      for (const auto& p : presets()) out << p.name << "  " << p.description << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace sacredit::cli

#endif  // SACREDIT_CLI_COMMANDS_HPP_
