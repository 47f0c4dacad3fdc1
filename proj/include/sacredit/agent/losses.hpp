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


#ifndef SACREDIT_AGENT_LOSSES_HPP_
#define SACREDIT_AGENT_LOSSES_HPP_

#include <optional>
#include <vector>

#include "sacredit/agent/networks.hpp"
#include "sacredit/agent/unroll.hpp"
#include "sacredit/agent/vtrace.hpp"
#include "sacredit/sr/config.hpp"
#include "sacredit/sr/head.hpp"
#include "sacredit/sr/losses.hpp"

namespace sacredit::agent {

// Log-probabilities of the chosen actions under each row's softmax.
template <typename T>
Mat<T> action_log_probs(const Mat<T>& logits, const std::vector<int>& actions) {
  Mat<T> out(logits.rows(), 1);
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const T top = logits.row(i).maxCoeff();
    const T lse = top + std::log((logits.row(i).array() - top).exp().sum());
    out(i, 0) = logits(i, actions[static_cast<std::size_t>(i)]) - lse;
  }
  return out;
}

template <typename T>
struct UnrollForward {
  Var logits;     // TB x A
  Var values;     // TB x 1
  Var bootstrap;  // B x 1
};

// Replays an unroll batch through the networks, zeroing the LSTM state at
// every episode start after step 0.
template <typename T>
UnrollForward<T> unroll_forward(Graph<T>& g, const AgentNetworks<T>& nets, const ParamSet<T>& params,
                                const UnrollBatch<T>& batch) {
  Var h = g.constant(batch.initial_state.hidden);
  Var c = g.constant(batch.initial_state.cell);
  std::vector<Var> logits, values;
  UnrollForward<T> out;
  for (int t = 0; t <= batch.length; ++t) {
    if (t > 0) {
      bool any = false;
      Mat<T> keep = Mat<T>::Ones(batch.batch, nets.lstm_width());
      for (int b = 0; b < batch.batch; ++b) {
        if (batch.first[t][b]) {
          keep.row(b).setZero();
          any = true;
        }
      }
      if (any) {
        h = g.mul_const(h, keep);
        c = g.mul_const(c, keep);
      }
    }
    const auto s = nets.step(g, params, g.constant(batch.observations[t]), h, c);
    if (t == batch.length) {
      out.bootstrap = s.value;
      break;
    }
    logits.push_back(s.logits);
    values.push_back(s.value);
    h = s.hidden;
    c = s.cell;
  }
  out.logits = g.concat_rows(logits);
  out.values = g.concat_rows(values);
  return out;
}

template <typename T>
struct ActorCriticLoss {
  Var total;
  Var policy_gradient;
  Var baseline;
  Var negative_entropy;  // sum of pi log pi
};

// -log pi(a) * adv + baseline_cost * (vs - V)^2 + entropy_cost * sum pi log pi,
// summed over batch and time. V-trace outputs enter as constants.
template <typename T>
ActorCriticLoss<T> actor_critic_loss(Graph<T>& g, Var logits, Var values, const std::vector<int>& actions,
                                     const VTraceOutputs<T>& vtrace, double entropy_cost, double baseline_cost = 0.5) {
  ActorCriticLoss<T> out;
  const Var logp = g.log_softmax(logits);
  out.policy_gradient =
      g.scale(g.sum(g.mul(g.pick(logp, actions), g.constant(vtrace.pg_advantages))), T(-1));
  out.baseline = g.scale(g.sum(g.square(g.sub(g.constant(vtrace.vs), values))), static_cast<T>(baseline_cost));
  out.negative_entropy = g.sum(g.mul(g.exp(logp), logp));
  out.total = g.add(g.add(out.policy_gradient, out.baseline),
                    g.scale(out.negative_entropy, static_cast<T>(entropy_cost)));
  return out;
}

template <typename T>
struct LearnerLoss {
  Var total;
  ActorCriticLoss<T> ac;
  std::optional<sr::SALoss<T>> sa;
  Mat<T> augmented_rewards;  // TB x 1
  VTraceOutputs<T> vtrace;
};

// Actor-critic loss on alpha * c + beta * r rewards, plus sr_loss_weight times
// the SA loss when an SR head is present. `head` may be null (no SR module).
template <typename T>
LearnerLoss<T> total_learner_loss(Graph<T>& g, const AgentNetworks<T>& nets, const sr::SRHead<T>* head,
                                  const sr::SRConfig& sr_cfg, const ParamSet<T>& params, const UnrollBatch<T>& batch) {
  const auto& cfg = nets.config();
  LearnerLoss<T> out;
  const auto fwd = unroll_forward(g, nets, params, batch);
  out.augmented_rewards = batch.rewards;
  if (head != nullptr) {
    out.sa = sr::sa_loss(g, *head, params, sr_cfg.loss_variant, batch.sa);
    const Mat<T>& c = g.value(out.sa->c_current);
    for (Eigen::Index i = 0; i < c.rows(); ++i) {
      out.augmented_rewards(i, 0) = static_cast<T>(
          sr::augment_reward(sr_cfg, static_cast<double>(c(i, 0)), static_cast<double>(batch.rewards(i, 0))));
    }
  }
  const Mat<T> gammas = batch.discounts * static_cast<T>(cfg.discount);
  out.vtrace = vtrace_targets(batch.length, batch.batch, action_log_probs(batch.behavior_logits, batch.actions),
                              action_log_probs(g.value(fwd.logits), batch.actions), gammas, out.augmented_rewards,
                              g.value(fwd.values), g.value(fwd.bootstrap), cfg.rho_bar, cfg.c_bar);
  out.ac = actor_critic_loss(g, fwd.logits, fwd.values, batch.actions, out.vtrace, cfg.entropy_cost,
                             cfg.baseline_cost);
  out.total = out.ac.total;
  if (out.sa) out.total = g.add(out.total, g.scale(out.sa->loss, static_cast<T>(sr_cfg.sr_loss_weight)));
  return out;
}

}  // namespace sacredit::agent

#endif  // SACREDIT_AGENT_LOSSES_HPP_
