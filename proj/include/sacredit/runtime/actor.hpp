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


#ifndef SACREDIT_RUNTIME_ACTOR_HPP_
#define SACREDIT_RUNTIME_ACTOR_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "sacredit/agent/networks.hpp"
#include "sacredit/agent/unroll.hpp"
#include "sacredit/envs/task.hpp"
#include "sacredit/random.hpp"
#include "sacredit/runtime/blob.hpp"
#include "sacredit/runtime/config.hpp"
#include "sacredit/runtime/model.hpp"
#include "sacredit/sr/memory.hpp"

namespace sacredit::runtime {

struct EpisodeRecord {
  double episode_return = 0.0;
  int length = 0;
  std::vector<double> stats;
};

// Raw material for an SR trace: what the actor stored and saw in one episode.
struct EpisodeLog {
  nn::Mat<float> representations;
  std::vector<double> rewards;
  std::vector<std::string> events;
};

struct ActorOutput {
  agent::Unroll<float> unroll;
  std::vector<EpisodeRecord> episodes;  // finished during this unroll
  std::optional<EpisodeLog> log;
  std::uint64_t sequence = 0;  // per actor, strictly increasing
};

struct ActorOptions {
  int slots = 1;          // environments stepped in lockstep
  int log_every = 0;      // every n-th finished episode of slot 0 is logged; 0 = never
  bool greedy = false;
};

// Steps `slots` environments with a shared parameter snapshot, producing one
// unroll per slot per call. Owns environments, LSTM states, episodic memories
// and its sampling RNG.
class Actor {
 public:
  Actor(const ExperimentConfig& cfg, const Model& model, int id, ActorOptions opts, std::uint64_t seed)
      : model_(model), id_(id), opts_(opts), rng_(derive_seed(seed, stream_tag("actor/policy"))) {
    if (opts_.slots < 1) throw ConfigError("actor needs at least one environment");
    const int width = model.nets->lstm_width();
    const int rep = model.nets->representation_width();
    for (int s = 0; s < opts_.slots; ++s) {
      Slot slot;
      slot.env = envs::make_environment(cfg.task, derive_seed(seed, stream_tag("actor/env") + static_cast<std::uint64_t>(s)));
      slot.memory = sr::EpisodicMemory<float>(model.memory_capacity, rep);
      slot.state = nn::LstmState<float>::zeros(1, width);
      slot.observation = to_row(slot.env->reset().observation);
      slot.first = 1;
      slots_.push_back(std::move(slot));
    }
    if (opts_.log_every > 0) slots_[0].logging = opts_.log_every == 1;
  }

  int id() const { return id_; }
  int slots() const { return opts_.slots; }
  std::int64_t steps() const { return steps_; }
  std::uint64_t episodes() const { return episodes_; }

  // One unroll per slot, all acted on with `params`.
  std::vector<ActorOutput> produce(const nn::ParamSet<float>& params, std::uint64_t version, int length) {
    const int n = opts_.slots;
    const int width = model_.nets->lstm_width();
    const int rep = model_.nets->representation_width();
    std::vector<ActorOutput> out(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
      auto& u = out[s].unroll;
      auto& slot = slots_[s];
      u.length = length;
      u.observations.resize(length + 1, model_.nets->observation_size());
      u.first.resize(static_cast<std::size_t>(length + 1));
      u.behavior_logits.resize(length, model_.num_actions);
      u.representations.resize(length, rep);
      u.initial_state = slot.state;
      u.memory_prefix = slot.memory.entries();
      u.param_version = version;
      u.actor = id_;
      out[s].sequence = sequence_++;
    }
    nn::Mat<float> obs(n, model_.nets->observation_size());
    nn::LstmState<float> state = nn::LstmState<float>::zeros(n, width);
    for (int t = 0; t < length; ++t) {
      for (int s = 0; s < n; ++s) {
        obs.row(s) = slots_[s].observation;
        state.hidden.row(s) = slots_[s].state.hidden;
        state.cell.row(s) = slots_[s].state.cell;
      }
      const auto act = model_.nets->act(params, obs, state, rng_, opts_.greedy);
      for (int s = 0; s < n; ++s) {
        auto& slot = slots_[s];
        auto& o = out[s];
        auto& u = o.unroll;
        u.observations.row(t) = slot.observation;
        u.first[t] = slot.first;
        u.actions.push_back(act.actions[s]);
        u.behavior_logits.row(t) = act.logits.row(s);
        u.representations.row(t) = act.representation.row(s);
        slot.memory.append(act.representation.row(s));
        slot.state = {act.state.hidden.row(s), act.state.cell.row(s)};
        const envs::EnvStep step = slot.env->step(act.actions[s]);
        ++steps_;
        u.rewards.push_back(step.reward);
        u.discounts.push_back(step.discount);
        slot.episode_return += step.reward;
        ++slot.episode_length;
        if (slot.logging) {
          slot.log.rewards.push_back(step.reward);
          slot.log.events.push_back(step.event);
        }
        if (step.terminal) {
          o.episodes.push_back({slot.episode_return, slot.episode_length, slot.env->episode_stats()});
          if (s == 0) finish_log(slot, o);
          ++episodes_;
          slot.episode_return = 0.0;
          slot.episode_length = 0;
          slot.memory.clear();
          slot.state = nn::LstmState<float>::zeros(1, width);
          slot.observation = to_row(slot.env->reset().observation);
          slot.first = 1;
        } else {
          slot.observation = to_row(step.observation);
          slot.first = 0;
        }
      }
    }
    for (int s = 0; s < n; ++s) {
      out[s].unroll.observations.row(length) = slots_[s].observation;
      out[s].unroll.first[length] = slots_[s].first;
    }
    return out;
  }

  std::string save_state() const {
    BlobWriter w;
    w.put(rng_state(rng_));
    w.put<std::int64_t>(steps_);
    w.put<std::uint64_t>(episodes_);
    w.put<std::uint64_t>(sequence_);
    w.put<std::uint64_t>(slot0_episodes_);
    for (const auto& s : slots_) {
      w.put(s.env->save_state());
      w.put(s.observation);
      w.put<std::uint8_t>(s.first);
      w.put(s.state.hidden);
      w.put(s.state.cell);
      w.put(nn::Mat<float>(s.memory.entries()));
      w.put<std::uint64_t>(s.memory.episode());
      w.put<double>(s.episode_return);
      w.put<std::int32_t>(s.episode_length);
      w.put<std::uint8_t>(s.logging ? 1 : 0);
      w.put(s.log.rewards);
      w.put(s.log.events);
    }
    return w.str();
  }

  void load_state(const std::string& blob) {
    BlobReader r(blob);
    set_rng_state(rng_, r.get_string());
    steps_ = r.get<std::int64_t>();
    episodes_ = r.get<std::uint64_t>();
    sequence_ = r.get<std::uint64_t>();
    slot0_episodes_ = r.get<std::uint64_t>();
    for (auto& s : slots_) {
      s.env->load_state(r.get_string());
      s.observation = r.get_mat();
      s.first = r.get<std::uint8_t>();
      s.state.hidden = r.get_mat();
      s.state.cell = r.get_mat();
      const nn::Mat<float> entries = r.get_mat();
      const auto episode = r.get<std::uint64_t>();
      s.memory = sr::EpisodicMemory<float>(s.memory.capacity(), s.memory.width());
      while (s.memory.episode() < episode) s.memory.clear();
      for (Eigen::Index k = 0; k < entries.rows(); ++k) s.memory.append(entries.row(k));
      s.episode_return = r.get<double>();
      s.episode_length = r.get<std::int32_t>();
      s.logging = r.get<std::uint8_t>() != 0;
      s.log.rewards = r.get_vector<double>();
      s.log.events = r.get_strings();
    }
    if (!r.done()) throw FormatError("actor state has trailing bytes (slot count changed?)");
  }

 private:
  struct Slot {
    std::unique_ptr<envs::Environment> env;
    sr::EpisodicMemory<float> memory{1, 1};
    nn::LstmState<float> state;
    nn::Mat<float> observation;
    std::uint8_t first = 1;
    double episode_return = 0.0;
    int episode_length = 0;
    bool logging = false;
    EpisodeLog log;
  };

  static nn::Mat<float> to_row(const std::vector<float>& v) {
    return Eigen::Map<const nn::Mat<float>>(v.data(), 1, static_cast<Eigen::Index>(v.size()));
  }

  void finish_log(Slot& slot, ActorOutput& o) {
    ++slot0_episodes_;
    if (slot.logging) {
      slot.log.representations = slot.memory.entries();
      o.log = std::move(slot.log);
      slot.log = EpisodeLog{};
    }
    if (opts_.log_every > 0) slot.logging = (slot0_episodes_ + 1) % static_cast<std::uint64_t>(opts_.log_every) == 0;
  }

  const Model& model_;
  int id_;
  ActorOptions opts_;
  Rng rng_;
  std::vector<Slot> slots_;
  std::int64_t steps_ = 0;
  std::uint64_t episodes_ = 0;
  std::uint64_t sequence_ = 0;
  std::uint64_t slot0_episodes_ = 0;
};

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_ACTOR_HPP_
