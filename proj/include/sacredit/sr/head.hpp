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


#ifndef SACREDIT_SR_HEAD_HPP_
#define SACREDIT_SR_HEAD_HPP_

#include <string>
#include <vector>

#include "sacredit/nn/graph.hpp"
#include "sacredit/nn/layers.hpp"
#include "sacredit/random.hpp"
#include "sacredit/sr/config.hpp"

namespace sacredit::sr {

// Contribution c, current-state bias b and gate g, each a scalar-output MLP
// over a state representation. g ends in a sigmoid.
template <typename T>
class SRHead {
 public:
  SRHead() = default;

  SRHead(int input_width, const SRConfig& cfg, nn::ParamSet<T>& params, const std::string& prefix = "sr")
      : input_width_(input_width),
        c_(spec(input_width, cfg.c_hidden, nn::Activation::kIdentity), params, prefix + "/c"),
        b_(spec(input_width, cfg.b_hidden, nn::Activation::kIdentity), params, prefix + "/b"),
        g_(spec(input_width, cfg.g_hidden, nn::Activation::kSigmoid), params, prefix + "/g") {}

  int input_width() const { return input_width_; }

  void initialize(nn::ParamSet<T>& params, Rng& rng, bool zero_outputs) const {
    c_.initialize(params, rng, zero_outputs);
    b_.initialize(params, rng, zero_outputs);
    g_.initialize(params, rng, zero_outputs);
  }

  // Each maps [n, input_width] to [n, 1].
  nn::Var contribution(nn::Graph<T>& g, const nn::ParamSet<T>& params, nn::Var x) const {
    return c_.forward(g, params, x);
  }
  nn::Var bias(nn::Graph<T>& g, const nn::ParamSet<T>& params, nn::Var x) const { return b_.forward(g, params, x); }
  nn::Var gate(nn::Graph<T>& g, const nn::ParamSet<T>& params, nn::Var x) const { return g_.forward(g, params, x); }

 private:
  static nn::MlpSpec spec(int in, const std::vector<int>& hidden, nn::Activation last) {
    std::vector<int> widths{in};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    return nn::MlpSpec::make(widths, nn::Activation::kRelu, last);
  }

  int input_width_ = 0;
  nn::Mlp<T> c_;
  nn::Mlp<T> b_;
  nn::Mlp<T> g_;
};

}  // namespace sacredit::sr

#endif  // SACREDIT_SR_HEAD_HPP_
