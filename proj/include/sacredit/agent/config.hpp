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


#ifndef SACREDIT_AGENT_CONFIG_HPP_
#define SACREDIT_AGENT_CONFIG_HPP_

#include <string>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/layers.hpp"

namespace sacredit::agent {

enum class EncoderKind { kMlp, kConv };
// Which vector act() hands to SR memory.
enum class Representation { kEncoder, kLstm };

inline std::string to_string(EncoderKind k) { return k == EncoderKind::kConv ? "conv" : "mlp"; }
inline EncoderKind encoder_kind_from_string(const std::string& s) {
  if (s == "mlp") return EncoderKind::kMlp;
  if (s == "conv") return EncoderKind::kConv;
  throw ConfigError("unknown encoder: " + s);
}
inline std::string to_string(Representation r) { return r == Representation::kLstm ? "lstm" : "encoder"; }
inline Representation representation_from_string(const std::string& s) {
  if (s == "encoder") return Representation::kEncoder;
  if (s == "lstm") return Representation::kLstm;
  throw ConfigError("unknown representation: " + s);
}

struct AgentConfig {
  EncoderKind encoder = EncoderKind::kMlp;
  std::vector<int> encoder_hidden{64};    // MLP widths, or the dense layer(s) after the conv stack
  std::vector<int> conv_channels{32, 64};  // 2x2 kernels, stride 1
  int conv_kernel = 2;
  int lstm_width = 64;
  int policy_hidden = 64;
  Representation representation = Representation::kEncoder;
  double discount = 0.9;
  double entropy_cost = 0.01;
  double baseline_cost = 0.5;
  double rho_bar = 1.0;
  double c_bar = 1.0;

  void validate() const {
    if (encoder_hidden.empty()) throw ConfigError("agent.encoder_hidden needs at least one width");
    for (int w : encoder_hidden) {
      if (w < 1) throw ConfigError("agent widths must be >= 1");
    }
    if (encoder == EncoderKind::kConv && conv_channels.empty()) throw ConfigError("conv encoder needs channels");
    if (lstm_width < 1 || policy_hidden < 1) throw ConfigError("agent widths must be >= 1");
    if (!(discount >= 0.0 && discount <= 1.0)) throw ConfigError("agent.discount must lie in [0, 1]");
    if (!(entropy_cost >= 0.0) || !(baseline_cost >= 0.0)) throw ConfigError("agent loss costs must be >= 0");
    if (!(rho_bar > 0.0) || !(c_bar > 0.0)) throw ConfigError("V-trace truncation levels must be > 0");
  }
};

}  // namespace sacredit::agent

#endif  // SACREDIT_AGENT_CONFIG_HPP_
