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


#ifndef SACREDIT_SR_LOSSES_HPP_
#define SACREDIT_SR_LOSSES_HPP_

#include <utility>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/graph.hpp"
#include "sacredit/sr/config.hpp"
#include "sacredit/sr/head.hpp"

namespace sacredit::sr {

using Range = std::pair<int, int>;

// A batch of SA regression samples over a shared table of stored
// representations. Sample i regresses rewards(i) from the current state
// rows.row(current[i]) and the memory rows [prefix[i].first, prefix[i].second).
// All rows enter the graph as constants, so no SA loss reaches whatever
// produced them.
template <typename T>
struct SABatch {
  nn::Mat<T> rows;
  std::vector<int> current;
  std::vector<Range> prefix;
  nn::Mat<T> rewards;  // n x 1

  int size() const { return static_cast<int>(current.size()); }

  void validate() const {
    if (prefix.size() != current.size() || rewards.rows() != size() || rewards.cols() != 1) {
      throw ConfigError("SA batch: sample counts disagree");
    }
    for (std::size_t i = 0; i < current.size(); ++i) {
      if (current[i] < 0 || current[i] >= rows.rows()) throw ConfigError("SA batch: current row out of range");
      if (prefix[i].first < 0 || prefix[i].second < prefix[i].first || prefix[i].second > rows.rows()) {
        throw ConfigError("SA batch: bad memory range");
      }
    }
  }
};

template <typename T>
struct SALoss {
  nn::Var loss;       // scalar, summed over samples
  nn::Var c_rows;     // c on every row of the batch table
  nn::Var c_current;  // c(s_t) per sample
  nn::Var b;          // b(s_t) per sample
  nn::Var gate;       // g(s_t) per sample
};

// SA loss from precomputed head outputs: c over the row table, b and g per
// sample (n x 1 each).
//   single_stage:        (r - g * sum c - b)^2
//   two_stage:           (r - b)^2 + (r - sg(b) - g * sum c)^2
//   sequential_residual: (r - b)^2 + sum_j (r - sg(b) - sum_{i<j} sg(g c_i) - g c_j)^2
// where j runs over the memory range in order.
template <typename T>
nn::Var sa_loss_from_outputs(nn::Graph<T>& g, LossVariant variant, nn::Var c_rows, nn::Var b, nn::Var gate,
                             const nn::Mat<T>& rewards, const std::vector<Range>& prefix) {
  const nn::Var r = g.constant(rewards);
  switch (variant) {
    case LossVariant::kSingleStage: {
      const nn::Var pred = g.add(g.mul(gate, g.range_sum(c_rows, prefix)), b);
      return g.sum(g.square(g.sub(r, pred)));
    }
    case LossVariant::kTwoStage: {
      const nn::Var first = g.sum(g.square(g.sub(r, b)));
      const nn::Var residual = g.sub(g.sub(r, g.stop_gradient(b)), g.mul(gate, g.range_sum(c_rows, prefix)));
      return g.add(first, g.sum(g.square(residual)));
    }
    case LossVariant::kSequentialResidual: {
      const nn::Var first = g.sum(g.square(g.sub(r, b)));
      const auto& c = g.value(c_rows);
      const auto& bv = g.value(b);
      const auto& gv = g.value(gate);
      std::vector<int> sample, row;
      std::vector<T> target;
      for (std::size_t i = 0; i < prefix.size(); ++i) {
        const auto n = static_cast<Eigen::Index>(i);
        T before = T(0);
        for (int j = prefix[i].first; j < prefix[i].second; ++j) {
          sample.push_back(static_cast<int>(i));
          row.push_back(j);
          target.push_back(rewards(n, 0) - bv(n, 0) - gv(n, 0) * before);
          before += c(j, 0);
        }
      }
      if (sample.empty()) return first;
      const nn::Var u = g.mul(g.gather_rows(gate, sample), g.gather_rows(c_rows, row));
      const nn::Var t = g.constant(Eigen::Map<const nn::Mat<T>>(target.data(), static_cast<Eigen::Index>(target.size()), 1));
      return g.add(first, g.sum(g.square(g.sub(t, u))));
    }
  }
  throw ConfigError("unknown SA loss variant");
}

template <typename T>
SALoss<T> sa_loss(nn::Graph<T>& g, const SRHead<T>& head, const nn::ParamSet<T>& params, LossVariant variant,
                  const SABatch<T>& batch) {
  batch.validate();
  SALoss<T> out;
  const nn::Var rows = g.constant(batch.rows);
  out.c_rows = head.contribution(g, params, rows);
  const nn::Var current = g.gather_rows(rows, batch.current);
  out.c_current = g.gather_rows(out.c_rows, batch.current);
  out.b = head.bias(g, params, current);
  out.gate = head.gate(g, params, current);
  out.loss = sa_loss_from_outputs(g, variant, out.c_rows, out.b, out.gate, batch.rewards, batch.prefix);
  return out;
}

// One sample: memory prefix s_0..s_{t-1} (rows, possibly empty), s_t and r_t.
template <typename T>
SABatch<T> single_sample(const nn::Mat<T>& prefix, const nn::Mat<T>& s_t, T r_t) {
  if (s_t.rows() != 1 || (prefix.rows() > 0 && prefix.cols() != s_t.cols())) {
    throw ConfigError("SA sample: representation widths disagree");
  }
  SABatch<T> batch;
  const auto p = static_cast<int>(prefix.rows());
  batch.rows.resize(p + 1, s_t.cols());
  if (p > 0) batch.rows.topRows(p) = prefix;
  batch.rows.row(p) = s_t.row(0);
  batch.current = {p};
  batch.prefix = {{0, p}};
  batch.rewards = nn::Mat<T>::Constant(1, 1, r_t);
  return batch;
}

template <typename T>
nn::Var sr_loss_single(nn::Graph<T>& g, const SRHead<T>& head, const nn::ParamSet<T>& params,
                       const nn::Mat<T>& prefix, const nn::Mat<T>& s_t, T r_t) {
  return sa_loss(g, head, params, LossVariant::kSingleStage, single_sample(prefix, s_t, r_t)).loss;
}

template <typename T>
nn::Var sr_loss_two_stage(nn::Graph<T>& g, const SRHead<T>& head, const nn::ParamSet<T>& params,
                          const nn::Mat<T>& prefix, const nn::Mat<T>& s_t, T r_t) {
  return sa_loss(g, head, params, LossVariant::kTwoStage, single_sample(prefix, s_t, r_t)).loss;
}

template <typename T>
nn::Var sr_loss_sequential_residual(nn::Graph<T>& g, const SRHead<T>& head, const nn::ParamSet<T>& params,
                                    const nn::Mat<T>& prefix, const nn::Mat<T>& s_t, T r_t) {
  return sa_loss(g, head, params, LossVariant::kSequentialResidual, single_sample(prefix, s_t, r_t)).loss;
}

}  // namespace sacredit::sr

#endif  // SACREDIT_SR_LOSSES_HPP_
