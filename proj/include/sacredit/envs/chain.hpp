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

#ifndef SACREDIT_ENVS_CHAIN_HPP_
#define SACREDIT_ENVS_CHAIN_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "sacredit/envs/environment.hpp"
#include "sacredit/random.hpp"

namespace sacredit::envs {

struct ChainConfig {
  int length = 17;         // number of chain states; must be odd
  int free_steps = 10;     // moves before the transition
  int trigger_offset = 7;  // relative to the centre state

  int half() const { return length / 2; }
  int observation_size() const { return length + 1; }
  // free moves, the masked transition, and one step out of the final state
  int episode_steps() const { return free_steps + 2; }

  void validate_geometry() const {
    if (length < 3 || length % 2 == 0) throw ConfigError("chain length must be odd and >= 3");
    if (free_steps < 1) throw ConfigError("chain needs at least one free move");
  }

  void validate() const {
    validate_geometry();
    if (std::abs(trigger_offset) > half()) throw ConfigError("trigger state lies outside the chain");
    if (std::abs(trigger_offset) > free_steps) throw ConfigError("trigger state unreachable within the free moves");
  }
};

// Visit probability commonly stated for the default configuration. Exact
// enumeration gives 22/1024; the acceptance suite reports both side by side.
inline constexpr double kQuotedTriggerVisitRate = 0.008;

// Chain task. The agent starts in the centre and moves left/right for
// `free_steps` steps (moving off an end is a no-op). The next step is the
// transition into the shared post-transition state; its discount is 0 so no
// Bellman backup crosses it. One more step from that state ends the episode
// with reward +1 iff the trigger state was visited.
//
// Observation: one-hot of length `length + 1`; index `length` is the
// post-transition state. Actions: 0 = left, 1 = right.
class ChainEnv : public Environment {
 public:
  explicit ChainEnv(ChainConfig cfg = {}) : cfg_(cfg) { cfg_.validate(); }

  std::string name() const override { return "chain"; }
  int num_actions() const override { return 2; }
  std::vector<int> observation_shape() const override { return {1, 1, cfg_.observation_size()}; }
  int max_episode_steps() const override { return cfg_.episode_steps(); }
  const ChainConfig& config() const { return cfg_; }
  int position() const { return position_; }
  bool trigger_visited() const { return visited_; }

  EnvStep reset() override {
    position_ = 0;
    step_ = 0;
    visited_ = cfg_.trigger_offset == 0;
    done_ = false;
    return make(0.0, 1.0, false);
  }

  EnvStep step(int action) override {
    if (done_) throw UsageError("step() after the episode ended");
    check_action(action, 2);
    ++step_;
    if (step_ <= cfg_.free_steps) {
      position_ = std::clamp(position_ + (action == 1 ? 1 : -1), -cfg_.half(), cfg_.half());
      visited_ = visited_ || position_ == cfg_.trigger_offset;
      return make(0.0, 1.0, false);
    }
    if (step_ == cfg_.free_steps + 1) return make(0.0, 0.0, false);
    done_ = true;
    return make(visited_ ? 1.0 : 0.0, 0.0, true);
  }

  std::vector<std::string> stat_names() const override { return {"trigger_visited"}; }
  std::vector<double> episode_stats() const override { return {visited_ ? 1.0 : 0.0}; }

  std::string save_state() const override {
    std::ostringstream os;
    os << position_ << ' ' << step_ << ' ' << visited_ << ' ' << done_;
    return os.str();
  }
  void load_state(const std::string& state) override {
    std::istringstream is(state);
    if (!(is >> position_ >> step_ >> visited_ >> done_)) throw FormatError("bad chain state");
  }

 private:
  bool in_final_state() const { return step_ > cfg_.free_steps; }

  EnvStep make(double reward, double discount, bool terminal) const {
    EnvStep s;
    s.observation.assign(static_cast<std::size_t>(cfg_.observation_size()), 0.0f);
    const int index = in_final_state() ? cfg_.length : position_ + cfg_.half();
    s.observation[static_cast<std::size_t>(index)] = 1.0f;
    s.reward = reward;
    s.discount = discount;
    s.terminal = terminal;
    s.step_index = step_;
    if (in_final_state()) {
      s.event = "final";
    } else {
      s.event = "pos=" + std::to_string(position_);
      if (position_ == cfg_.trigger_offset) append_event(s.event, "trigger");
    }
    return s;
  }

  ChainConfig cfg_;
  int position_ = 0;
  int step_ = 0;
  bool visited_ = false;
  bool done_ = true;
};

// Exact probability that a uniformly random left/right sequence visits the
// trigger, by enumerating every action sequence of the free moves.
inline double trigger_visit_rate_exact(const ChainConfig& cfg) {
  cfg.validate_geometry();
  if (cfg.free_steps > 24) throw ConfigError("enumeration limited to 24 free moves");
  const std::uint64_t total = 1ull << cfg.free_steps;
  std::uint64_t hits = 0;
  for (std::uint64_t seq = 0; seq < total; ++seq) {
    int pos = 0;
    bool visited = cfg.trigger_offset == 0;
    for (int t = 0; t < cfg.free_steps && !visited; ++t) {
      pos += ((seq >> t) & 1u) ? 1 : -1;
      pos = std::clamp(pos, -cfg.half(), cfg.half());
      visited = pos == cfg.trigger_offset;
    }
    hits += visited ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(total);
}

struct VisitRateEstimate {
  double estimate = 0.0;
  double standard_error = 0.0;
  int episodes = 0;
};

// Monte-Carlo estimate of the same probability by running the environment
// under a uniform random policy.
inline VisitRateEstimate random_policy_visit_rate(const ChainConfig& cfg, int episodes, Rng& rng) {
  if (episodes < 1) throw ConfigError("need at least one episode");
  cfg.validate_geometry();
  // Offsets outside the chain or out of reach are never visited.
  if (std::abs(cfg.trigger_offset) > cfg.half() || std::abs(cfg.trigger_offset) > cfg.free_steps) {
    return {0.0, 0.0, episodes};
  }
  ChainEnv env(cfg);
  int hits = 0;
  for (int e = 0; e < episodes; ++e) {
    EnvStep s = env.reset();
    while (!s.terminal) s = env.step(uniform_int(rng, 2));
    hits += s.reward > 0.0 ? 1 : 0;
  }
  const double p = static_cast<double>(hits) / episodes;
  return {p, std::sqrt(p * (1.0 - p) / episodes), episodes};
}

}  // namespace sacredit::envs

#endif  // SACREDIT_ENVS_CHAIN_HPP_
