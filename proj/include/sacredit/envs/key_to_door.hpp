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

#ifndef SACREDIT_ENVS_KEY_TO_DOOR_HPP_
#define SACREDIT_ENVS_KEY_TO_DOOR_HPP_

#include <algorithm>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sacredit/envs/environment.hpp"
#include "sacredit/random.hpp"

namespace sacredit::envs {

enum class KeyToDoorVariant { kStandard, kZeroDoorStepPenalty, kTwoKeys };

inline std::string to_string(KeyToDoorVariant v) {
  switch (v) {
    case KeyToDoorVariant::kZeroDoorStepPenalty:
      return "zero_door_step_penalty";
    case KeyToDoorVariant::kTwoKeys:
      return "two_keys";
    case KeyToDoorVariant::kStandard:
      break;
  }
  return "standard";
}

inline KeyToDoorVariant key_to_door_variant_from_string(const std::string& s) {
  if (s == "standard") return KeyToDoorVariant::kStandard;
  if (s == "zero_door_step_penalty") return KeyToDoorVariant::kZeroDoorStepPenalty;
  if (s == "two_keys") return KeyToDoorVariant::kTwoKeys;
  throw ConfigError("unknown key-to-door variant: " + s);
}

struct KeyToDoorConfig {
  int room = 6;  // interior side length; walls are implicit
  int apples = 4;
  int phase1_steps = 15;
  int phase2_steps = 60;
  int phase3_steps = 10;
  double apple_reward = 1.0;
  double door_reward = 5.0;
  KeyToDoorVariant variant = KeyToDoorVariant::kStandard;
  bool time_cue = false;

  int episode_steps() const { return phase1_steps + phase2_steps + phase3_steps; }
  int channels() const { return kObjectChannels + (time_cue ? 1 : 0); }

  static constexpr int kObjectChannels = 5;  // agent, key, red key, apple, door

  void validate() const {
    if (room < 2) throw ConfigError("key-to-door room must be at least 2x2");
    if (apples < 0 || apples > room * room - 1) throw ConfigError("too many apples for the room");
    if (phase1_steps < 1 || phase2_steps < 1 || phase3_steps < 1) throw ConfigError("phases must last >= 1 step");
  }
};

// Key-to-Door in three rooms. Phase 1: a key (two keys, yellow and red, in the
// two_keys variant) can be picked up by stepping on it. Phase 2: apples give
// +1 each. Phase 3: stepping onto the door with a key opens it and ends the
// episode; without a key the door blocks like a wall. The agent is moved into
// the next room exactly when a phase's step budget is used up, and the
// episode times out at the end of phase 3.
//
// Rewards per variant: standard +5 for opening; zero_door_step_penalty -1 for
// every phase-3 step except the one that opens the door (0); two_keys -1/-2
// for opening with the yellow/red key and -5 on timeout without opening.
//
// Observation: interior one-hot object map [room, room, 5] (agent, yellow key,
// red key, apple, door). The key is drawn under the agent on the step it is
// picked up, so the pickup frame is unique. Actions: up, right, down, left.
class KeyToDoorEnv : public Environment {
 public:
  KeyToDoorEnv(KeyToDoorConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

  std::string name() const override { return "key-to-door"; }
  int num_actions() const override { return 4; }
  std::vector<int> observation_shape() const override { return {cfg_.room, cfg_.room, cfg_.channels()}; }
  int max_episode_steps() const override { return cfg_.episode_steps(); }
  const KeyToDoorConfig& config() const { return cfg_; }

  int phase() const {
    if (step_ < cfg_.phase1_steps) return 1;
    if (step_ < cfg_.phase1_steps + cfg_.phase2_steps) return 2;
    return 3;
  }
  std::pair<int, int> agent() const { return agent_; }
  std::pair<int, int> key() const { return key_; }
  std::pair<int, int> red_key() const { return red_key_; }
  std::pair<int, int> door() const { return door_; }
  const std::vector<std::pair<int, int>>& apple_cells() const { return apples_; }
  int held_key() const { return held_; }

  EnvStep reset() override {
    step_ = 0;
    held_ = 0;
    apples_eaten_ = 0;
    door_opened_ = false;
    done_ = false;
    flash_ = false;
    apples_.clear();
    const int objects = cfg_.variant == KeyToDoorVariant::kTwoKeys ? 3 : 2;
    const auto cells = sample_cells(objects);
    agent_ = cells[0];
    key_ = cells[1];
    red_key_ = objects == 3 ? cells[2] : kNone;
    door_ = kNone;
    return make(0.0, 1.0, false, "");
  }

  EnvStep step(int action) override {
    if (done_) throw UsageError("step() after the episode ended");
    check_action(action, 4);
    const int phase_before = phase();
    const auto target = move(agent_, action);
    double reward = 0.0;
    std::string event;
    flash_ = false;
    bool opened = false;
    if (phase_before == 3 && target == door_) {
      if (held_ != 0) {
        opened = true;
        agent_ = target;
      }
    } else {
      agent_ = target;
    }
    if (phase_before == 1 && held_ == 0) {
      if (agent_ == key_) {
        held_ = 1;
        event = "key";
      } else if (agent_ == red_key_) {
        held_ = 2;
        event = "key_red";
      }
      if (held_ != 0) {
        flash_ = true;
        key_ = kNone;
        red_key_ = kNone;
      }
    } else if (phase_before == 2) {
      auto it = std::find(apples_.begin(), apples_.end(), agent_);
      if (it != apples_.end()) {
        apples_.erase(it);
        ++apples_eaten_;
        reward += cfg_.apple_reward;
        event = "apple";
      }
    }
    ++step_;
    if (phase_before == 3) {
      reward += phase3_reward(opened);
      if (opened) {
        door_opened_ = true;
        done_ = true;
        return make(reward, 0.0, true, "door");
      }
      if (step_ == cfg_.episode_steps()) {
        if (cfg_.variant == KeyToDoorVariant::kTwoKeys) reward += -5.0;
        done_ = true;
        return make(reward, 0.0, true, "timeout");
      }
      return make(reward, 1.0, false, event);
    }
    if (step_ == cfg_.phase1_steps) enter_phase2();
    if (step_ == cfg_.phase1_steps + cfg_.phase2_steps) enter_phase3();
    return make(reward, 1.0, false, event);
  }

  std::vector<std::string> stat_names() const override {
    return {"key", "red_key", "apples", "apple_fraction", "door"};
  }
  std::vector<double> episode_stats() const override {
    const double frac = cfg_.apples > 0 ? static_cast<double>(apples_eaten_) / cfg_.apples : 1.0;
    return {held_ != 0 ? 1.0 : 0.0, held_ == 2 ? 1.0 : 0.0, static_cast<double>(apples_eaten_), frac,
            door_opened_ ? 1.0 : 0.0};
  }

  std::string save_state() const override {
    std::ostringstream os;
    os << step_ << ' ' << held_ << ' ' << apples_eaten_ << ' ' << door_opened_ << ' ' << done_ << ' ' << flash_ << ' '
       << agent_.first << ' ' << agent_.second << ' ' << key_.first << ' ' << key_.second << ' ' << red_key_.first
       << ' ' << red_key_.second << ' ' << door_.first << ' ' << door_.second << ' ' << apples_.size();
    for (const auto& a : apples_) os << ' ' << a.first << ' ' << a.second;
    os << ' ' << rng_;
    return os.str();
  }
  void load_state(const std::string& state) override {
    std::istringstream is(state);
    std::size_t n = 0;
    is >> step_ >> held_ >> apples_eaten_ >> door_opened_ >> done_ >> flash_ >> agent_.first >> agent_.second >>
        key_.first >> key_.second >> red_key_.first >> red_key_.second >> door_.first >> door_.second >> n;
    apples_.assign(n, kNone);
    for (auto& a : apples_) is >> a.first >> a.second;
    is >> rng_;
    if (!is) throw FormatError("bad key-to-door state");
  }

 private:
  static constexpr std::pair<int, int> kNone{-1, -1};

  double phase3_reward(bool opened) const {
    switch (cfg_.variant) {
      case KeyToDoorVariant::kStandard:
        return opened ? cfg_.door_reward : 0.0;
      case KeyToDoorVariant::kZeroDoorStepPenalty:
        return opened ? 0.0 : -1.0;
      case KeyToDoorVariant::kTwoKeys:
        return opened ? (held_ == 1 ? -1.0 : -2.0) : 0.0;
    }
    return 0.0;
  }

  std::pair<int, int> move(std::pair<int, int> p, int action) const {
    static constexpr int dr[4] = {-1, 0, 1, 0};
    static constexpr int dc[4] = {0, 1, 0, -1};
    const int r = p.first + dr[action];
    const int c = p.second + dc[action];
    if (r < 0 || c < 0 || r >= cfg_.room || c >= cfg_.room) return p;
    return {r, c};
  }

  // Distinct uniformly random interior cells (partial Fisher-Yates).
  std::vector<std::pair<int, int>> sample_cells(int count) {
    std::vector<int> cells(static_cast<std::size_t>(cfg_.room * cfg_.room));
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<int>(i);
    std::vector<std::pair<int, int>> out;
    for (int k = 0; k < count; ++k) {
      const int j = k + uniform_int(rng_, static_cast<int>(cells.size()) - k);
      std::swap(cells[k], cells[j]);
      out.emplace_back(cells[k] / cfg_.room, cells[k] % cfg_.room);
    }
    return out;
  }

  void enter_phase2() {
    auto cells = sample_cells(1 + cfg_.apples);
    agent_ = cells[0];
    apples_.assign(cells.begin() + 1, cells.end());
    flash_ = false;
    key_ = kNone;
    red_key_ = kNone;
  }

  void enter_phase3() {
    auto cells = sample_cells(2);
    agent_ = cells[0];
    door_ = cells[1];
    apples_.clear();
  }

  EnvStep make(double reward, double discount, bool terminal, std::string event) const {
    EnvStep s;
    const int channels = cfg_.channels();
    s.observation.assign(static_cast<std::size_t>(cfg_.room * cfg_.room * channels), 0.0f);
    auto set = [&](std::pair<int, int> p, int ch, float v) {
      if (p.first < 0) return;
      s.observation[static_cast<std::size_t>((p.first * cfg_.room + p.second) * channels + ch)] = v;
    };
    set(agent_, 0, 1.0f);
    set(key_, 1, 1.0f);
    set(red_key_, 2, 1.0f);
    for (const auto& a : apples_) set(a, 3, 1.0f);
    set(door_, 4, 1.0f);
    if (flash_) set(agent_, held_ == 2 ? 2 : 1, 1.0f);
    if (cfg_.time_cue) {
      const float left = static_cast<float>(cfg_.episode_steps() - step_) / static_cast<float>(cfg_.episode_steps());
      for (int r = 0; r < cfg_.room; ++r) {
        for (int c = 0; c < cfg_.room; ++c) set({r, c}, KeyToDoorConfig::kObjectChannels, left);
      }
    }
    s.reward = reward;
    s.discount = discount;
    s.terminal = terminal;
    s.step_index = step_;
    s.event = std::move(event);
    if (!terminal) append_event(s.event, "phase=" + std::to_string(phase()));
    return s;
  }

  KeyToDoorConfig cfg_;
  Rng rng_;
  int step_ = 0;
  int held_ = 0;  // 0 none, 1 yellow (or the only key), 2 red
  int apples_eaten_ = 0;
  bool door_opened_ = false;
  bool done_ = true;
  bool flash_ = false;
  std::pair<int, int> agent_ = kNone;
  std::pair<int, int> key_ = kNone;
  std::pair<int, int> red_key_ = kNone;
  std::pair<int, int> door_ = kNone;
  std::vector<std::pair<int, int>> apples_;
};

}  // namespace sacredit::envs

#endif  // SACREDIT_ENVS_KEY_TO_DOOR_HPP_
