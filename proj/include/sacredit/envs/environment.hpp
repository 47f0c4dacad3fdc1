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

#ifndef SACREDIT_ENVS_ENVIRONMENT_HPP_
#define SACREDIT_ENVS_ENVIRONMENT_HPP_

#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "sacredit/errors.hpp"

namespace sacredit::envs {

// Result of reset() or step(). `reward` and `discount` are the consequence of
// the action just taken; `observation` and `event` describe the state that was
// entered. `discount` multiplies bootstrapping from that state.
struct EnvStep {
  std::vector<float> observation;
  double reward = 0.0;
  double discount = 1.0;
  bool terminal = false;
  int step_index = 0;
  // Semicolon separated annotations of the entered state ("catch", "key", ...).
  std::string event;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual EnvStep reset() = 0;
  virtual EnvStep step(int action) = 0;
  virtual int num_actions() const = 0;
  // {height, width, channels}; flattened observations are stored in that
  // order (channels fastest).
  virtual std::vector<int> observation_shape() const = 0;
  // Upper bound on the decision steps of one episode.
  virtual int max_episode_steps() const = 0;

  // Per-episode counters for metrics. Values refer to the current episode,
  // which after a terminal step is the one that just finished.
  virtual std::vector<std::string> stat_names() const = 0;
  virtual std::vector<double> episode_stats() const = 0;

  virtual std::string save_state() const = 0;
  virtual void load_state(const std::string& state) = 0;

  int observation_size() const {
    const auto s = observation_shape();
    return std::accumulate(s.begin(), s.end(), 1, std::multiplies<int>());
  }

 protected:
  static void check_action(int action, int arity) {
    if (action < 0 || action >= arity) throw UsageError("action index out of range");
  }
};

inline bool has_event(const std::string& events, const std::string& tag) {
  std::size_t start = 0;
  while (start <= events.size()) {
    const std::size_t end = events.find(';', start);
    const std::size_t stop = end == std::string::npos ? events.size() : end;
    if (events.compare(start, stop - start, tag) == 0) return true;
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return false;
}

inline void append_event(std::string& events, const std::string& tag) {
  if (!events.empty()) events += ';';
  events += tag;
}

}  // namespace sacredit::envs

#endif  // SACREDIT_ENVS_ENVIRONMENT_HPP_
