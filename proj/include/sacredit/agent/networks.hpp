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


#ifndef SACREDIT_AGENT_NETWORKS_HPP_
#define SACREDIT_AGENT_NETWORKS_HPP_

#include <cmath>
#include <string>
#include <vector>

#include "sacredit/agent/config.hpp"
#include "sacredit/nn/graph.hpp"
#include "sacredit/nn/layers.hpp"
#include "sacredit/random.hpp"

namespace sacredit::agent {

using nn::Graph;
using nn::Mat;
using nn::ParamSet;
using nn::Var;

template <typename T>
struct StepOutputs {
  Var encoded;
  Var hidden;
  Var cell;
  Var logits;
  Var value;  // [n, 1]
  Var representation;
};

template <typename T>
struct ActResult {
  std::vector<int> actions;
  Mat<T> logits;
  Mat<T> representation;
  nn::LstmState<T> state;
};

// Samples from softmax(logits) using one uniform draw.
template <typename Row>
int sample_action(const Row& logits, Rng& rng) {
  const auto n = logits.size();
  double top = static_cast<double>(logits(0));
  for (Eigen::Index a = 1; a < n; ++a) top = std::max(top, static_cast<double>(logits(a)));
  std::vector<double> p(static_cast<std::size_t>(n));
  double total = 0.0;
  for (Eigen::Index a = 0; a < n; ++a) total += p[a] = std::exp(static_cast<double>(logits(a)) - top);
  double u = uniform01(rng) * total;
  for (Eigen::Index a = 0; a + 1 < n; ++a) {
    if (u < p[a]) return static_cast<int>(a);
    u -= p[a];
  }
  return static_cast<int>(n - 1);
}

template <typename Row>
int greedy_action(const Row& logits) {
  Eigen::Index best = 0;
  logits.maxCoeff(&best);
  return static_cast<int>(best);
}

// Encoder -> LSTM -> (policy logits, baseline). Observations are flattened
// [H, W, C] rows.
template <typename T>
class AgentNetworks {
 public:
  AgentNetworks(const AgentConfig& cfg, std::vector<int> obs_shape, int num_actions, ParamSet<T>& params,
                const std::string& prefix = "agent")
      : cfg_(cfg), obs_shape_(std::move(obs_shape)), num_actions_(num_actions) {
    cfg_.validate();
    if (obs_shape_.size() != 3 || num_actions < 1) throw ConfigError("agent needs an [H, W, C] shape and actions");
    obs_size_ = obs_shape_[0] * obs_shape_[1] * obs_shape_[2];
    int width = obs_size_;
    if (cfg_.encoder == EncoderKind::kConv) {
      nn::ConvSpec spec{obs_shape_[0], obs_shape_[1], obs_shape_[2], {}};
      for (int ch : cfg_.conv_channels) spec.layers.push_back({ch, cfg_.conv_kernel, 1, nn::Activation::kRelu});
      conv_ = nn::ConvNet<T>(spec, params, prefix + "/conv");
      width = spec.output_features();
    }
    std::vector<int> widths{width};
    widths.insert(widths.end(), cfg_.encoder_hidden.begin(), cfg_.encoder_hidden.end());
    encoder_ = nn::Mlp<T>(nn::MlpSpec::make(widths, nn::Activation::kRelu, nn::Activation::kRelu), params,
                          prefix + "/enc");
    lstm_ = nn::Lstm<T>(widths.back(), cfg_.lstm_width, params, prefix + "/lstm");
    torso_ = nn::Mlp<T>(nn::MlpSpec::make({cfg_.lstm_width, cfg_.policy_hidden}, nn::Activation::kRelu,
                                          nn::Activation::kRelu),
                        params, prefix + "/torso");
    policy_ = nn::Mlp<T>(nn::MlpSpec::make({cfg_.policy_hidden, num_actions}, nn::Activation::kIdentity,
                                           nn::Activation::kIdentity),
                         params, prefix + "/policy");
    baseline_ = nn::Mlp<T>(nn::MlpSpec::make({cfg_.policy_hidden, 1}, nn::Activation::kIdentity,
                                             nn::Activation::kIdentity),
                           params, prefix + "/baseline");
  }

  const AgentConfig& config() const { return cfg_; }
  int num_actions() const { return num_actions_; }
  int observation_size() const { return obs_size_; }
  int encoder_width() const { return encoder_.spec().output_width(); }
  int lstm_width() const { return cfg_.lstm_width; }
  int representation_width() const {
    return cfg_.representation == Representation::kLstm ? cfg_.lstm_width : encoder_width();
  }

  // The policy layer starts at zero, so an untrained agent acts uniformly.
  void initialize(ParamSet<T>& params, Rng& rng) const {
    if (cfg_.encoder == EncoderKind::kConv) conv_.initialize(params, rng);
    encoder_.initialize(params, rng);
    lstm_.initialize(params, rng);
    torso_.initialize(params, rng);
    policy_.initialize(params, rng, true);
    baseline_.initialize(params, rng);
  }

  // One time step for a batch: x [n, obs], (h, c) [n, lstm].
  StepOutputs<T> step(Graph<T>& g, const ParamSet<T>& params, Var x, Var h, Var c) const {
    if (g.value(x).cols() != obs_size_) {
      throw ConfigError("observation size " + std::to_string(g.value(x).cols()) + " != " + std::to_string(obs_size_));
    }
    StepOutputs<T> out;
    Var e = cfg_.encoder == EncoderKind::kConv ? conv_.forward(g, params, x) : x;
    out.encoded = encoder_.forward(g, params, e);
    std::tie(out.hidden, out.cell) = lstm_.step(g, params, out.encoded, h, c);
    const Var torso = torso_.forward(g, params, out.hidden);
    out.logits = policy_.forward(g, params, torso);
    out.value = baseline_.forward(g, params, torso);
    out.representation = cfg_.representation == Representation::kLstm ? out.hidden : out.encoded;
    return out;
  }

  // Forward without a tape, then sample (or take argmax) per row.
  ActResult<T> act(const ParamSet<T>& params, const Mat<T>& obs, const nn::LstmState<T>& state, Rng& rng,
                   bool greedy = false) const {
    if (obs.rows() != state.hidden.rows()) throw ConfigError("act(): observation and state batch sizes differ");
    Graph<T> g(false);
    const auto out = step(g, params, g.constant(obs), g.constant(state.hidden), g.constant(state.cell));
    ActResult<T> r;
    r.logits = g.value(out.logits);
    r.representation = g.value(out.representation);
    r.state = {g.value(out.hidden), g.value(out.cell)};
    r.actions.resize(static_cast<std::size_t>(obs.rows()));
    for (Eigen::Index i = 0; i < obs.rows(); ++i) {
      r.actions[i] = greedy ? greedy_action(r.logits.row(i)) : sample_action(r.logits.row(i), rng);
    }
    return r;
  }

 private:
  AgentConfig cfg_;
  std::vector<int> obs_shape_;
  int num_actions_ = 0;
  int obs_size_ = 0;
  nn::ConvNet<T> conv_;
  nn::Mlp<T> encoder_;
  nn::Lstm<T> lstm_;
  nn::Mlp<T> torso_;
  nn::Mlp<T> policy_;
  nn::Mlp<T> baseline_;
};

}  // namespace sacredit::agent

#endif  // SACREDIT_AGENT_NETWORKS_HPP_
