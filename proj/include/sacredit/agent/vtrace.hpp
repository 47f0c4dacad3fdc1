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


#ifndef SACREDIT_AGENT_VTRACE_HPP_
#define SACREDIT_AGENT_VTRACE_HPP_

#include <algorithm>
#include <cmath>

#include "sacredit/errors.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::agent {

// All per-step arrays are TB x 1 columns in time-major order (row t * B + b).
template <typename T>
struct VTraceOutputs {
  nn::Mat<T> vs;
  nn::Mat<T> pg_advantages;
  nn::Mat<T> clipped_rhos;
};

// V-trace with lambda = 1. `discounts` are the per-step gammas (agent discount
// times environment discount); log-probabilities are of the taken actions.
template <typename T>
VTraceOutputs<T> vtrace_targets(int length, int batch, const nn::Mat<T>& behavior_logp, const nn::Mat<T>& target_logp,
                                const nn::Mat<T>& discounts, const nn::Mat<T>& rewards, const nn::Mat<T>& values,
                                const nn::Mat<T>& bootstrap, double rho_bar = 1.0, double c_bar = 1.0) {
  const Eigen::Index n = static_cast<Eigen::Index>(length) * batch;
  for (const auto* m : {&behavior_logp, &target_logp, &discounts, &rewards, &values}) {
    if (m->rows() != n || m->cols() != 1) throw ConfigError("vtrace_targets(): per-step inputs must be TB x 1");
  }
  if (bootstrap.size() != batch) throw ConfigError("vtrace_targets(): bootstrap must have one value per sequence");
  VTraceOutputs<T> out;
  out.vs.resize(n, 1);
  out.pg_advantages.resize(n, 1);
  out.clipped_rhos.resize(n, 1);
  nn::Mat<T> cs(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const T rho = std::exp(target_logp(i, 0) - behavior_logp(i, 0));
    out.clipped_rhos(i, 0) = std::min(rho, static_cast<T>(rho_bar));
    cs(i, 0) = std::min(rho, static_cast<T>(c_bar));
  }
  for (int b = 0; b < batch; ++b) {
    T next_value = bootstrap(b);
    T acc = T(0);  // v_{s+1} - V(x_{s+1})
    for (int t = length - 1; t >= 0; --t) {
      const Eigen::Index i = static_cast<Eigen::Index>(t) * batch + b;
      const T delta = out.clipped_rhos(i, 0) * (rewards(i, 0) + discounts(i, 0) * next_value - values(i, 0));
      acc = delta + discounts(i, 0) * cs(i, 0) * acc;
      out.vs(i, 0) = values(i, 0) + acc;
      next_value = values(i, 0);
    }
    for (int t = 0; t < length; ++t) {
      const Eigen::Index i = static_cast<Eigen::Index>(t) * batch + b;
      const T vs_next = t + 1 < length ? out.vs(i + batch, 0) : bootstrap(b);
      out.pg_advantages(i, 0) = out.clipped_rhos(i, 0) * (rewards(i, 0) + discounts(i, 0) * vs_next - values(i, 0));
    }
  }
  return out;
}

}  // namespace sacredit::agent

#endif  // SACREDIT_AGENT_VTRACE_HPP_
