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


#ifndef SACREDIT_SR_CONFIG_HPP_
#define SACREDIT_SR_CONFIG_HPP_

#include <string>
#include <vector>

#include "sacredit/errors.hpp"

namespace sacredit::sr {

enum class LossVariant { kSingleStage, kTwoStage, kSequentialResidual };

inline std::string to_string(LossVariant v) {
  switch (v) {
    case LossVariant::kTwoStage:
      return "two_stage";
    case LossVariant::kSequentialResidual:
      return "sequential_residual";
    case LossVariant::kSingleStage:
      break;
  }
  return "single_stage";
}

inline LossVariant loss_variant_from_string(const std::string& s) {
  if (s == "single_stage") return LossVariant::kSingleStage;
  if (s == "two_stage") return LossVariant::kTwoStage;
  if (s == "sequential_residual") return LossVariant::kSequentialResidual;
  throw ConfigError("unknown SR loss variant: " + s);
}

struct SRConfig {
  double alpha = 0.3;
  double beta = 1.0;
  LossVariant loss_variant = LossVariant::kSingleStage;
  double sr_loss_weight = 1.0;  // 0 together with alpha = 0 is the baseline ablation
  std::vector<int> c_hidden{64, 64};
  std::vector<int> b_hidden{64, 64};
  std::vector<int> g_hidden{64};
  bool zero_init_outputs = true;  // c = b = 0 and g = 0.5 before training

  // The module changes nothing when it neither shapes the reward nor trains.
  bool inert() const { return alpha == 0.0 && sr_loss_weight == 0.0; }

  void validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw ConfigError("sr.alpha and sr.beta must be >= 0");
    if (!(sr_loss_weight >= 0.0)) throw ConfigError("sr.loss_weight must be >= 0");
    for (const auto* h : {&c_hidden, &b_hidden, &g_hidden}) {
      for (int w : *h) {
        if (w < 1) throw ConfigError("SR hidden widths must be >= 1");
      }
    }
  }
};

// Eq. 2 style reward: alpha * c_t + beta * r_t, with c_t already detached.
inline double augment_reward(const SRConfig& cfg, double c_t, double r_t) {
  if (cfg.alpha == 0.0) return cfg.beta * r_t;  // keeps the baseline stream bit-exact, even for non-finite c
  return cfg.alpha * c_t + cfg.beta * r_t;
}

}  // namespace sacredit::sr

#endif  // SACREDIT_SR_CONFIG_HPP_
