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

#ifndef SACREDIT_CLI_PRESETS_HPP_
#define SACREDIT_CLI_PRESETS_HPP_

#include <string>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/runtime/config.hpp"

namespace sacredit::cli {

// What a preset is expected to reach; mirrored by the acceptance suite.
struct Expectation {
  std::string metric;       // metrics column judged
  double threshold = 0.0;   // SR runs must reach at least this
  std::int64_t budget = 0;  // environment steps
  int seeds = 1;
  int required = 1;         // passing seeds needed
};

struct Preset {
  std::string name;
  std::string description;
  runtime::ExperimentConfig config;
  Expectation expected;
};

namespace detail {

inline runtime::ExperimentConfig desk_defaults() {
  runtime::ExperimentConfig cfg;
  cfg.run.unroll_length = 20;
  cfg.run.batch_size = 32;
  cfg.run.actors = 8;
  cfg.run.log_every = 50'000;
  cfg.run.stat_window = 100;
  cfg.run.trace_every = 10;
  cfg.run.checkpoint_every = 2'000'000;
  return cfg;
}

inline Preset chain() {
  Preset p{"chain", "17-state chain, trigger 7 right of centre, 10 free moves", desk_defaults(), {}};
  auto& c = p.config;
  c.task.kind = envs::TaskKind::kChain;
  c.run.unroll_length = 12;
  c.run.total_steps = 5'000'000;
  c.agent.discount = 0.9;
  c.sr.alpha = 0.3;
  p.expected = {"mean_return", 0.9, 5'000'000, 3, 2};
  return p;
}

inline Preset catch_standard() {
  Preset p{"catch", "7x7 catch, 20 runs per episode, reward on every catch", desk_defaults(), {}};
  auto& c = p.config;
  c.task.kind = envs::TaskKind::kCatch;
  c.task.catch_game.runs = 20;
  c.task.catch_game.delayed = false;
  c.run.total_steps = 20'000'000;
  c.agent.discount = 0.9;
  c.sr.alpha = 0.1;
  p.expected = {"mean_catches", 19.0, 20'000'000, 2, 2};
  return p;
}

inline Preset catch_delayed() {
  Preset p{"catch-delayed", "7x7 catch, 10 runs, all catches paid at the end of the episode", desk_defaults(), {}};
  auto& c = p.config;
  c.task.kind = envs::TaskKind::kCatch;
  c.task.catch_game.runs = 10;
  c.task.catch_game.delayed = true;
  c.run.total_steps = 60'000'000;
  c.agent.discount = 0.9;
  c.sr.alpha = 0.5;
  p.expected = {"mean_catches", 9.0, 60'000'000, 2, 1};
  return p;
}

inline runtime::ExperimentConfig reduced_key_to_door() {
  auto c = desk_defaults();
  c.task.kind = envs::TaskKind::kKeyToDoor;
  auto& k = c.task.key_to_door;
  k.room = 5;
  k.apples = 3;
  k.phase1_steps = 15;
  k.phase2_steps = 30;
  k.phase3_steps = 10;
  c.run.total_steps = 20'000'000;
  c.agent.discount = 0.9;
  c.sr.alpha = 0.1;
  return c;
}

inline Preset key_to_door() {
  Preset p{"key-to-door", "5x5 rooms, phases of 15/30/10 steps, 3 apples, door pays 5", reduced_key_to_door(), {}};
  p.expected = {"mean_door", 0.8, 20'000'000, 1, 1};
  return p;
}

inline Preset key_to_door_zero() {
  Preset p{"key-to-door-zero", "key-to-door with a free door and -1 per step in the last room", reduced_key_to_door(),
           {}};
  p.config.task.key_to_door.variant = envs::KeyToDoorVariant::kZeroDoorStepPenalty;
  p.expected = {"mean_door", 0.8, 20'000'000, 1, 1};
  return p;
}

inline Preset key_to_door_two_keys() {
  Preset p{"key-to-door-two-keys", "key-to-door with yellow (-1) and red (-2) keys and -5 for a closed door",
           reduced_key_to_door(), {}};
  p.config.task.key_to_door.variant = envs::KeyToDoorVariant::kTwoKeys;
  p.expected = {"mean_door", 0.8, 20'000'000, 1, 1};
  return p;
}

}  // namespace detail

inline std::vector<Preset> presets() {
  return {detail::chain(),       detail::catch_standard(),   detail::catch_delayed(),
          detail::key_to_door(), detail::key_to_door_zero(), detail::key_to_door_two_keys()};
}

inline std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& p : presets()) names.push_back(p.name);
  return names;
}

inline Preset find_preset(const std::string& name) {
  for (auto& p : presets()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& n : preset_names()) known += (known.empty() ? "" : ", ") + n;
  throw UsageError("unknown preset '" + name + "' (known: " + known + ")");
}

}  // namespace sacredit::cli

#endif  // SACREDIT_CLI_PRESETS_HPP_
