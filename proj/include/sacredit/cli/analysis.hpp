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

#ifndef SACREDIT_CLI_ANALYSIS_HPP_
#define SACREDIT_CLI_ANALYSIS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "sacredit/envs/environment.hpp"
#include "sacredit/errors.hpp"
#include "sacredit/runtime/metrics.hpp"
#include "sacredit/sr/trace.hpp"

namespace sacredit::cli {

namespace fs = std::filesystem;

// Record t holds c(s_t) and the events of the step taken from s_t, so the
// state s_t itself is described by the events of step t - 1. Step 0 is the
// reset state.
inline std::vector<std::string> arrival_events(const sr::SRTrace& trace) {
  std::vector<std::string> out(trace.size());
  for (std::size_t t = 0; t < trace.size(); ++t) out[t] = t == 0 ? "reset" : trace[t - 1].event;
  return out;
}

struct RunningStats {
  std::size_t n = 0;
  double sum = 0.0;
  double sq = 0.0;

  void add(double x) {
    ++n;
    sum += x;
    sq += x * x;
  }
  double mean() const { return n ? sum / static_cast<double>(n) : std::numeric_limits<double>::quiet_NaN(); }
  // Sample variance.
  double variance() const {
    if (n < 2) return 0.0;
    const double m = mean();
    return std::max(0.0, (sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
  }
  double stddev() const { return std::sqrt(variance()); }
};

// ---------------------------------------------------------------------------
// Chain: mean synthetic return per chain position.

inline constexpr int kFinalPosition = std::numeric_limits<int>::max();

struct PositionRow {
  int position = 0;  // kFinalPosition for the post-transition state
  std::size_t count = 0;
  double mean_c = 0.0;
  double std_c = 0.0;
  bool trigger = false;
};

inline std::optional<int> parse_position(const std::string& events) {
  std::size_t start = 0;
  while (start < events.size()) {
    const std::size_t end = std::min(events.find(';', start), events.size());
    const std::string tag = events.substr(start, end - start);
    if (tag.rfind("pos=", 0) == 0) return std::stoi(tag.substr(4));
    start = end + 1;
  }
  return std::nullopt;
}

inline std::vector<PositionRow> chain_position_table(const std::vector<sr::SRTrace>& traces, int trigger_offset) {
  std::map<int, RunningStats> by_pos;
  for (const auto& tr : traces) {
    const auto arrival = arrival_events(tr);
    for (std::size_t t = 0; t < tr.size(); ++t) {
      int pos = kFinalPosition;
      if (t == 0) {
        pos = 0;
      } else if (auto p = parse_position(arrival[t])) {
        pos = *p;
      }
      by_pos[pos].add(tr[t].c);
    }
  }
  std::vector<PositionRow> rows;
  for (const auto& [pos, s] : by_pos) rows.push_back({pos, s.n, s.mean(), s.stddev(), pos == trigger_offset});
  return rows;
}

// Mean c at the trigger position divided by the mean over the remaining chain
// positions (the final state is excluded). Infinite when the others average
// to zero or less while the trigger is positive.
struct TriggerContrast {
  double trigger_c = std::numeric_limits<double>::quiet_NaN();
  double others_c = std::numeric_limits<double>::quiet_NaN();
  double ratio = std::numeric_limits<double>::quiet_NaN();
};

inline TriggerContrast trigger_contrast(const std::vector<PositionRow>& rows) {
  TriggerContrast out;
  RunningStats others;
  for (const auto& r : rows) {
    if (r.position == kFinalPosition) continue;
    if (r.trigger) {
      out.trigger_c = r.mean_c;
    } else {
      others.add(r.mean_c);
    }
  }
  out.others_c = others.mean();
  if (std::isnan(out.trigger_c) || std::isnan(out.others_c)) return out;
  if (out.others_c > 0.0) {
    out.ratio = out.trigger_c / out.others_c;
  } else {
    out.ratio = out.trigger_c > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Event alignment: c at states reached by an event versus all other states.

struct EventAlignment {
  std::string tag;
  RunningStats event;
  RunningStats other;
  // Welch statistic of the mean difference.
  double z() const {
    if (event.n == 0 || other.n == 0) return std::numeric_limits<double>::quiet_NaN();
    const double se = std::sqrt(event.variance() / static_cast<double>(event.n) +
                                other.variance() / static_cast<double>(other.n));
    const double diff = event.mean() - other.mean();
    if (se == 0.0) return diff == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), diff);
    return diff / se;
  }
  double difference() const { return event.mean() - other.mean(); }
};

inline EventAlignment event_alignment(const std::vector<sr::SRTrace>& traces, const std::string& tag) {
  EventAlignment a;
  a.tag = tag;
  for (const auto& tr : traces) {
    const auto arrival = arrival_events(tr);
    for (std::size_t t = 0; t < tr.size(); ++t) {
      (envs::has_event(arrival[t], tag) ? a.event : a.other).add(tr[t].c);
    }
  }
  return a;
}

struct ProfileRow {
  int offset = 0;
  std::size_t count = 0;
  double mean_c = 0.0;
  double std_c = 0.0;
};

// Mean c at fixed offsets from every state reached by `tag`.
inline std::vector<ProfileRow> event_profile(const std::vector<sr::SRTrace>& traces, const std::string& tag, int window) {
  std::vector<RunningStats> stats(static_cast<std::size_t>(2 * window + 1));
  for (const auto& tr : traces) {
    const auto arrival = arrival_events(tr);
    const int n = static_cast<int>(tr.size());
    for (int t = 0; t < n; ++t) {
      if (!envs::has_event(arrival[static_cast<std::size_t>(t)], tag)) continue;
      for (int d = -window; d <= window; ++d) {
        if (t + d >= 0 && t + d < n) stats[static_cast<std::size_t>(d + window)].add(tr[static_cast<std::size_t>(t + d)].c);
      }
    }
  }
  std::vector<ProfileRow> rows;
  for (int d = -window; d <= window; ++d) {
    const auto& s = stats[static_cast<std::size_t>(d + window)];
    rows.push_back({d, s.n, s.mean(), s.stddev()});
  }
  return rows;
}

// Fraction of episodes containing `tag` whose largest c over the states
// matching `scope` (all states when empty) is a state reached by `tag`.
inline double argmax_hit_rate(const std::vector<sr::SRTrace>& traces, const std::string& tag, const std::string& scope) {
  std::size_t with_event = 0, hits = 0;
  for (const auto& tr : traces) {
    const auto arrival = arrival_events(tr);
    std::optional<std::size_t> best;
    bool has = false;
    for (std::size_t t = 0; t < tr.size(); ++t) {
      has = has || envs::has_event(arrival[t], tag);
      if (!scope.empty() && !envs::has_event(arrival[t], scope) && !envs::has_event(arrival[t], tag) && t != 0) continue;
      if (!best || tr[t].c > tr[*best].c) best = t;
    }
    if (!has) continue;
    ++with_event;
    if (best && envs::has_event(arrival[*best], tag)) ++hits;
  }
  return with_event ? static_cast<double>(hits) / static_cast<double>(with_event)
                    : std::numeric_limits<double>::quiet_NaN();
}

struct StepRow {
  int step = 0;
  RunningStats c, g, b, reward;
};

inline std::vector<StepRow> step_profile(const std::vector<sr::SRTrace>& traces) {
  std::vector<StepRow> rows;
  for (const auto& tr : traces) {
    for (std::size_t t = 0; t < tr.size(); ++t) {
      if (rows.size() <= t) rows.push_back(StepRow{static_cast<int>(t), {}, {}, {}, {}});
      rows[t].c.add(tr[t].c);
      rows[t].g.add(tr[t].g);
      rows[t].b.add(tr[t].b);
      rows[t].reward.add(tr[t].reward);
    }
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Run-directory report.

inline std::vector<std::string> event_tags(const std::string& task_kind) {
  if (task_kind == "chain") return {"trigger"};
  if (task_kind == "catch") return {"catch", "miss"};
  return {"key", "key_red", "apple", "door"};
}

struct SRReport {
  std::string task;
  std::size_t episodes = 0;
  std::vector<PositionRow> positions;  // chain only
  std::optional<TriggerContrast> contrast;
  std::vector<EventAlignment> events;
  std::vector<std::vector<ProfileRow>> profiles;  // aligned with events
  std::vector<StepRow> steps;
};

inline nlohmann::json read_run_config(const fs::path& run_dir) {
  std::ifstream in(run_dir / "config.json");
  if (!in) throw FormatError("no config.json in " + run_dir.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("bad config.json in " + run_dir.string() + ": " + e.what());
  }
}

inline std::vector<sr::SRTrace> read_run_traces(const fs::path& run_dir) {
  std::ifstream in(run_dir / "traces.jsonl");
  if (!in) throw FormatError("no traces.jsonl in " + run_dir.string());
  return sr::read_sr_traces_jsonl(in);
}

// `last` > 0 keeps only the most recent episodes.
inline SRReport analyze_traces(std::vector<sr::SRTrace> traces, const std::string& task, int trigger_offset,
                               std::size_t last = 0, int window = 5) {
  if (traces.empty()) throw FormatError("the run has no SR traces to analyse");
  if (last > 0 && traces.size() > last) traces.erase(traces.begin(), traces.end() - static_cast<long>(last));
  SRReport r;
  r.task = task;
  r.episodes = traces.size();
  if (task == "chain") {
    r.positions = chain_position_table(traces, trigger_offset);
    r.contrast = trigger_contrast(r.positions);
  }
  for (const auto& tag : event_tags(task)) {
    r.events.push_back(event_alignment(traces, tag));
    r.profiles.push_back(event_profile(traces, tag, window));
  }
  r.steps = step_profile(traces);
  return r;
}

inline SRReport analyze_run(const fs::path& run_dir, std::size_t last = 0) {
  const auto cfg = read_run_config(run_dir);
  const std::string task = cfg.at("task").at("kind").get<std::string>();
  const int trigger = std::stoi(cfg.at("chain").at("trigger_offset").get<std::string>());
  return analyze_traces(read_run_traces(run_dir), task, trigger, last);
}

inline void write_report(const SRReport& r, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  using runtime::format_metric;
  if (!r.positions.empty()) {
    std::ofstream out(out_dir / "sr_positions.csv");
    out << "position,count,mean_c,std_c,trigger\n";
    for (const auto& p : r.positions) {
      out << (p.position == kFinalPosition ? std::string("final") : std::to_string(p.position)) << ',' << p.count
          << ',' << format_metric(p.mean_c) << ',' << format_metric(p.std_c) << ',' << (p.trigger ? 1 : 0) << '\n';
    }
  }
  {
    std::ofstream out(out_dir / "sr_events.csv");
    out << "event,n_event,n_other,mean_c_event,mean_c_other,difference,z\n";
    for (const auto& e : r.events) {
      out << e.tag << ',' << e.event.n << ',' << e.other.n << ',' << format_metric(e.event.mean()) << ','
          << format_metric(e.other.mean()) << ',' << format_metric(e.difference()) << ',' << format_metric(e.z())
          << '\n';
    }
  }
  {
    std::ofstream out(out_dir / "sr_event_profiles.csv");
    out << "event,offset,count,mean_c,std_c\n";
    for (std::size_t i = 0; i < r.events.size(); ++i) {
      for (const auto& p : r.profiles[i]) {
        out << r.events[i].tag << ',' << p.offset << ',' << p.count << ',' << format_metric(p.mean_c) << ','
            << format_metric(p.std_c) << '\n';
      }
    }
  }
  {
    std::ofstream out(out_dir / "sr_steps.csv");
    out << "step,count,mean_c,std_c,mean_g,mean_b,mean_reward\n";
    for (const auto& s : r.steps) {
      out << s.step << ',' << s.c.n << ',' << format_metric(s.c.mean()) << ',' << format_metric(s.c.stddev()) << ','
          << format_metric(s.g.mean()) << ',' << format_metric(s.b.mean()) << ',' << format_metric(s.reward.mean())
          << '\n';
    }
  }
}

// ---------------------------------------------------------------------------
// Curve comparison across runs.

struct RunCurves {
  std::string condition;
  std::string series;  // seed, or the run directory name when seeds repeat
  runtime::MetricsTable table;
};

struct CurvePoint {
  std::string condition;
  std::string series;  // a run, or "mean"
  double env_steps = 0.0;
  std::string metric;
  double value = 0.0;
  std::size_t runs = 1;       // runs contributing (mean rows)
  bool interpolated = false;  // not a logged point of (every contributing) run
};

// Linear interpolation of y(x) at `at`; NaN outside the logged range.
inline std::pair<double, bool> interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double at) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (xs.empty() || at < xs.front() || at > xs.back()) return {nan, true};
  const auto it = std::lower_bound(xs.begin(), xs.end(), at);
  const auto i = static_cast<std::size_t>(it - xs.begin());
  if (xs[i] == at) return {ys[i], false};
  const double w = (at - xs[i - 1]) / (xs[i] - xs[i - 1]);
  return {ys[i - 1] + w * (ys[i] - ys[i - 1]), true};
}

// Every metric of every run on the union of all logged step counts, plus the
// per-condition mean over runs that cover each grid point.
inline std::vector<CurvePoint> compare_curves(const std::vector<RunCurves>& runs,
                                              const std::vector<std::string>& metrics = {}) {
  if (runs.empty()) throw UsageError("compare needs at least one run");
  const auto& header = runs.front().table.header;
  for (const auto& r : runs) {
    if (r.table.header != header) {
      throw FormatError("metrics schema of " + r.condition + "/" + r.series + " differs from " +
                        runs.front().condition + "/" + runs.front().series);
    }
  }
  if (runs.front().table.column("env_steps") < 0) throw FormatError("metrics have no env_steps column");
  std::vector<std::string> names = metrics;
  if (names.empty()) {
    for (const auto& h : header) {
      if (h != "env_steps") names.push_back(h);
    }
  }
  for (const auto& m : names) {
    if (runs.front().table.column(m) < 0) throw FormatError("metrics have no column " + m);
  }
  std::set<double> grid_set;
  for (const auto& r : runs) {
    for (double s : r.table.values("env_steps")) grid_set.insert(s);
  }
  const std::vector<double> grid(grid_set.begin(), grid_set.end());
  std::vector<std::string> conditions;
  for (const auto& r : runs) {
    if (std::find(conditions.begin(), conditions.end(), r.condition) == conditions.end()) conditions.push_back(r.condition);
  }

  std::vector<CurvePoint> out;
  for (const auto& cond : conditions) {
    for (const auto& m : names) {
      std::vector<RunningStats> mean(grid.size());
      std::vector<bool> mean_interp(grid.size(), false);
      for (const auto& r : runs) {
        if (r.condition != cond) continue;
        const auto xs = r.table.values("env_steps");
        const auto ys = r.table.values(m);
        for (std::size_t i = 1; i < xs.size(); ++i) {
          if (!(xs[i] > xs[i - 1])) throw FormatError("env_steps not increasing in " + cond + "/" + r.series);
        }
        for (std::size_t i = 0; i < grid.size(); ++i) {
          const auto [v, interp] = interpolate(xs, ys, grid[i]);
          if (std::isnan(v) && interp) continue;  // outside this run's range
          out.push_back({cond, r.series, grid[i], m, v, 1, interp});
          if (!std::isnan(v)) {
            mean[i].add(v);
            mean_interp[i] = mean_interp[i] || interp;
          }
        }
      }
      for (std::size_t i = 0; i < grid.size(); ++i) {
        if (mean[i].n == 0) continue;
        out.push_back({cond, "mean", grid[i], m, mean[i].mean(), mean[i].n, mean_interp[i]});
      }
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const CurvePoint& a, const CurvePoint& b) {
    return std::tie(a.condition, a.metric, a.series, a.env_steps) < std::tie(b.condition, b.metric, b.series, b.env_steps);
  });
  return out;
}

inline void write_curves_csv(const std::vector<CurvePoint>& points, std::ostream& out) {
  out << "condition,series,env_steps,metric,value,runs,interpolated\n";
  for (const auto& p : points) {
    out << p.condition << ',' << p.series << ',' << runtime::format_metric(p.env_steps) << ',' << p.metric << ','
        << runtime::format_metric(p.value) << ',' << p.runs << ',' << (p.interpolated ? 1 : 0) << '\n';
  }
}

// Loads metrics.csv from run directories; the series name is the run's seed
// unless two runs of a condition share one.
inline std::vector<RunCurves> load_runs(const std::vector<std::pair<std::string, fs::path>>& dirs) {
  std::vector<RunCurves> runs;
  for (const auto& [cond, dir] : dirs) {
    RunCurves r;
    r.condition = cond;
    r.table = runtime::read_csv_file((dir / "metrics.csv").string());
    std::string seed;
    if (fs::exists(dir / "config.json")) seed = read_run_config(dir).at("run").at("seed").get<std::string>();
    r.series = seed.empty() ? dir.filename().string() : "seed" + seed;
    for (const auto& o : runs) {
      if (o.condition == cond && o.series == r.series) {
        r.series = dir.filename().string();
        break;
      }
    }
    runs.push_back(std::move(r));
  }
  return runs;
}

}  // namespace sacredit::cli

#endif  // SACREDIT_CLI_ANALYSIS_HPP_
