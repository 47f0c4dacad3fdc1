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

#ifndef SACREDIT_ENVS_TASK_HPP_
#define SACREDIT_ENVS_TASK_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "sacredit/envs/catch.hpp"
#include "sacredit/envs/chain.hpp"
#include "sacredit/envs/environment.hpp"
#include "sacredit/envs/key_to_door.hpp"

namespace sacredit::envs {

enum class TaskKind { kChain, kCatch, kKeyToDoor };

inline std::string to_string(TaskKind k) {
  switch (k) {
    case TaskKind::kCatch:
      return "catch";
    case TaskKind::kKeyToDoor:
      return "key_to_door";
    case TaskKind::kChain:
      break;
  }
  return "chain";
}

inline TaskKind task_kind_from_string(const std::string& s) {
  if (s == "chain") return TaskKind::kChain;
  if (s == "catch") return TaskKind::kCatch;
  if (s == "key_to_door") return TaskKind::kKeyToDoor;
  throw ConfigError("unknown task: " + s);
}

struct TaskConfig {
  TaskKind kind = TaskKind::kChain;
  ChainConfig chain;
  CatchConfig catch_game;
  KeyToDoorConfig key_to_door;

  void validate() const {
    switch (kind) {
      case TaskKind::kChain:
        chain.validate();
        break;
      case TaskKind::kCatch:
        catch_game.validate();
        break;
      case TaskKind::kKeyToDoor:
        key_to_door.validate();
        break;
    }
  }
};

inline std::unique_ptr<Environment> make_environment(const TaskConfig& task, std::uint64_t seed) {
  task.validate();
  switch (task.kind) {
    case TaskKind::kCatch:
      return std::make_unique<CatchEnv>(task.catch_game, seed);
    case TaskKind::kKeyToDoor:
      return std::make_unique<KeyToDoorEnv>(task.key_to_door, seed);
    case TaskKind::kChain:
      break;
  }
  return std::make_unique<ChainEnv>(task.chain);
}

}  // namespace sacredit::envs

#endif  // SACREDIT_ENVS_TASK_HPP_
