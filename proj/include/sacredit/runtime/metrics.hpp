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


#ifndef SACREDIT_RUNTIME_METRICS_HPP_
#define SACREDIT_RUNTIME_METRICS_HPP_

#include <cmath>
#include <cstdint>
#include <deque>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/runtime/actor.hpp"
#include "sacredit/runtime/blob.hpp"
#include "sacredit/runtime/model.hpp"

namespace sacredit::runtime {

struct MetricsTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
  std::vector<double> values(const std::string& name) const {
    const int c = column(name);
    if (c < 0) throw ConfigError("metrics have no column " + name);
    std::vector<double> out;
    for (const auto& r : rows) out.push_back(r[static_cast<std::size_t>(c)]);
    return out;
  }
};

inline std::string format_metric(double v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

inline void write_csv_header(std::ostream& out, const std::vector<std::string>& header) {
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
}

inline void write_csv_row(std::ostream& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_metric(row[i]);
  out << '\n';
}

inline void write_csv(const MetricsTable& t, std::ostream& out) {
  write_csv_header(out, t.header);
  for (const auto& r : t.rows) write_csv_row(out, r);
}

inline MetricsTable read_csv(std::istream& in) {
  MetricsTable t;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("metrics CSV is empty");
  std::stringstream hs(line);
  std::string cell;
  while (std::getline(hs, cell, ',')) t.header.push_back(cell);
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream rs(line);
    while (std::getline(rs, cell, ',')) {
      try {
        row.push_back(cell == "nan" ? std::numeric_limits<double>::quiet_NaN() : std::stod(cell));
      } catch (const std::exception&) {
        throw FormatError("metrics CSV line " + std::to_string(line_no) + ": bad number '" + cell + "'");
      }
    }
    if (row.size() != t.header.size()) {
      throw FormatError("metrics CSV line " + std::to_string(line_no) + " has " + std::to_string(row.size()) +
                        " cells, header has " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

inline MetricsTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot read " + path);
  return read_csv(in);
}

// Rolling episode statistics plus learner-step averages per logging window.
class MetricsTracker {
 public:
  MetricsTracker(std::vector<std::string> stat_names, int window)
      : stat_names_(std::move(stat_names)), window_(static_cast<std::size_t>(window)) {}

  std::vector<std::string> header() const {
    std::vector<std::string> h{"env_steps", "learner_steps", "episodes", "mean_return"};
    for (const auto& s : stat_names_) h.push_back("mean_" + s);
    for (const char* s : {"loss_total", "loss_pg", "loss_baseline", "neg_entropy", "loss_sa", "grad_norm",
                          "sr_grad_norm", "mean_reward", "sr_mean_c", "sr_max_abs_c", "max_lag"}) {
      h.emplace_back(s);
    }
    return h;
  }

  void add_episode(const EpisodeRecord& e) {
    recent_.push_back(e);
    if (recent_.size() > window_) recent_.pop_front();
    ++episodes_;
  }

  void add_learner_step(const LearnerStats& s, std::uint64_t lag) {
    const double v[kLearnerColumns] = {s.total, s.policy_gradient, s.baseline, s.negative_entropy, s.sa,
                                       s.grad_norm, s.sr_grad_norm, s.mean_reward, s.mean_c};
    for (int i = 0; i < kLearnerColumns; ++i) sums_[i] += v[i];
    max_abs_c_ = std::max(max_abs_c_, s.max_abs_c);
    max_lag_ = std::max(max_lag_, lag);
    ++window_steps_;
  }

  bool window_full() const { return recent_.size() >= window_; }
  std::uint64_t episodes() const { return episodes_; }

  double mean_return() const {
    if (recent_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const auto& e : recent_) total += e.episode_return;
    return total / static_cast<double>(recent_.size());
  }

  double mean_stat(std::size_t k) const {
    if (recent_.empty()) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (const auto& e : recent_) total += e.stats[k];
    return total / static_cast<double>(recent_.size());
  }

  // Emits the row for the window that just closed and starts a new window.
  std::vector<double> row(std::int64_t env_steps, std::int64_t learner_steps) {
    std::vector<double> r{static_cast<double>(env_steps), static_cast<double>(learner_steps),
                          static_cast<double>(episodes_), mean_return()};
    for (std::size_t k = 0; k < stat_names_.size(); ++k) r.push_back(mean_stat(k));
    const double n = window_steps_ > 0 ? static_cast<double>(window_steps_) : std::numeric_limits<double>::quiet_NaN();
    for (int i = 0; i < kLearnerColumns; ++i) r.push_back(sums_[i] / n);
    r.push_back(window_steps_ > 0 ? max_abs_c_ : std::numeric_limits<double>::quiet_NaN());
    r.push_back(static_cast<double>(max_lag_));
    std::fill(std::begin(sums_), std::end(sums_), 0.0);
    max_abs_c_ = 0.0;
    max_lag_ = 0;
    window_steps_ = 0;
    return r;
  }

  std::string save_state() const {
    BlobWriter w;
    w.put<std::uint64_t>(episodes_);
    w.put<std::uint64_t>(recent_.size());
    for (const auto& e : recent_) {
      w.put<double>(e.episode_return);
      w.put<std::int32_t>(e.length);
      w.put(e.stats);
    }
    for (double s : sums_) w.put<double>(s);
    w.put<double>(max_abs_c_);
    w.put<std::uint64_t>(max_lag_);
    w.put<std::int64_t>(window_steps_);
    return w.str();
  }

  void load_state(const std::string& blob) {
    BlobReader r(blob);
    episodes_ = r.get<std::uint64_t>();
    recent_.clear();
    const auto n = r.get<std::uint64_t>();
    for (std::uint64_t i = 0; i < n; ++i) {
      EpisodeRecord e;
      e.episode_return = r.get<double>();
      e.length = r.get<std::int32_t>();
      e.stats = r.get_vector<double>();
      recent_.push_back(std::move(e));
    }
    for (double& s : sums_) s = r.get<double>();
    max_abs_c_ = r.get<double>();
    max_lag_ = r.get<std::uint64_t>();
    window_steps_ = r.get<std::int64_t>();
  }

 private:
  static constexpr int kLearnerColumns = 9;
  std::vector<std::string> stat_names_;
  std::size_t window_;
  std::deque<EpisodeRecord> recent_;
  std::uint64_t episodes_ = 0;
  double sums_[kLearnerColumns] = {};
  double max_abs_c_ = 0.0;
  std::uint64_t max_lag_ = 0;
  std::int64_t window_steps_ = 0;
};

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_METRICS_HPP_
