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


#ifndef SACREDIT_RUNTIME_MODEL_HPP_
#define SACREDIT_RUNTIME_MODEL_HPP_

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "sacredit/agent/losses.hpp"
#include "sacredit/agent/networks.hpp"
#include "sacredit/envs/task.hpp"
#include "sacredit/nn/optimizer.hpp"
#include "sacredit/random.hpp"
#include "sacredit/runtime/config.hpp"
#include "sacredit/sr/head.hpp"

namespace sacredit::runtime {

// Network structure plus its parameters. The agent's parameters are registered
// first and the SR head's after them, so an SR-less model is a prefix.
struct Model {
  nn::ParamSet<float> params;
  std::unique_ptr<agent::AgentNetworks<float>> nets;
  std::unique_ptr<sr::SRHead<float>> head;  // null without an SR module
  std::vector<int> obs_shape;
  int num_actions = 0;
  int memory_capacity = 0;

  explicit Model(const ExperimentConfig& cfg) {
    const auto env = envs::make_environment(cfg.task, 0);
    obs_shape = env->observation_shape();
    num_actions = env->num_actions();
    memory_capacity = env->max_episode_steps();
    nets = std::make_unique<agent::AgentNetworks<float>>(cfg.agent, obs_shape, num_actions, params);
    if (cfg.sr_enabled) {
      head = std::make_unique<sr::SRHead<float>>(nets->representation_width(), cfg.sr, params);
    }
  }

  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Separate RNG streams keep the agent's initial weights independent of
  // whether an SR head exists.
  void initialize(const ExperimentConfig& cfg) {
    Rng agent_rng(derive_seed(cfg.run.seed, stream_tag("init/agent")));
    nets->initialize(params, agent_rng);
    if (head) {
      Rng sr_rng(derive_seed(cfg.run.seed, stream_tag("init/sr")));
      head->initialize(params, sr_rng, cfg.sr.zero_init_outputs);
    }
  }
};

struct LearnerStats {
  double total = 0.0;
  double policy_gradient = 0.0;
  double baseline = 0.0;
  double negative_entropy = 0.0;
  double sa = 0.0;
  double grad_norm = 0.0;     // agent parameters, before clipping
  double sr_grad_norm = 0.0;  // SR head parameters, before clipping
  double mean_reward = 0.0;  // augmented, per step
  double mean_c = 0.0;       // per step, SR runs only
  double max_abs_c = 0.0;
};

class Learner {
 public:
  Learner(const ExperimentConfig& cfg, Model& model) : cfg_(cfg), model_(model), opt_(cfg.optim, model.params) {}

  nn::Optimizer<float>& optimizer() { return opt_; }
  const nn::Optimizer<float>& optimizer() const { return opt_; }

  LearnerStats step(const std::vector<const agent::Unroll<float>*>& unrolls) {
    const auto batch = agent::stack_unrolls(unrolls);
    nn::Graph<float> g;
    const auto loss = agent::total_learner_loss<float>(g, *model_.nets, model_.head.get(), cfg_.sr, model_.params, batch);
    LearnerStats s;
    s.total = g.scalar(loss.total);
    if (!std::isfinite(s.total)) {
      throw NumericError("non-finite learner loss (policy " + std::to_string(g.scalar(loss.ac.policy_gradient)) +
                         ", baseline " + std::to_string(g.scalar(loss.ac.baseline)) + ", sa " +
                         (loss.sa ? std::to_string(g.scalar(loss.sa->loss)) : std::string("n/a")) + ")");
    }
    s.policy_gradient = g.scalar(loss.ac.policy_gradient);
    s.baseline = g.scalar(loss.ac.baseline);
    s.negative_entropy = g.scalar(loss.ac.negative_entropy);
    s.mean_reward = loss.augmented_rewards.cast<double>().mean();
    if (loss.sa) {
      s.sa = g.scalar(loss.sa->loss);
      const auto c = g.value(loss.sa->c_current).cast<double>();
      s.mean_c = c.mean();
      s.max_abs_c = c.cwiseAbs().maxCoeff();
    }
    g.backward(loss.total);
    nn::ParamSet<float> grads = model_.params.zeros_like();
    g.accumulate_param_grads(model_.params, grads);
    // The RL and SA losses reach disjoint parameters; each group is clipped on its own.
    s.grad_norm = nn::clip_group_norm(grads, cfg_.optim.clip_norm, "agent/");
    if (model_.head) s.sr_grad_norm = nn::clip_group_norm(grads, cfg_.optim.clip_norm, "sr/");
    opt_.step(model_.params, grads);
    return s;
  }

 private:
  const ExperimentConfig& cfg_;
  Model& model_;
  nn::Optimizer<float> opt_;
};

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_MODEL_HPP_
