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


#ifndef SACREDIT_AGENT_UNROLL_HPP_
#define SACREDIT_AGENT_UNROLL_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/layers.hpp"
#include "sacredit/nn/param_set.hpp"
#include "sacredit/sr/losses.hpp"

namespace sacredit::agent {

// One actor sequence of `length` steps. Observation t is what the agent saw
// before action t; observation `length` is only bootstrapped from.
// first[t] marks observation t as the start of an episode; the LSTM state
// entering such a step and the SR memory before it are both empty.
template <typename T>
struct Unroll {
  int length = 0;
  nn::Mat<T> observations;      // (length + 1) x obs
  std::vector<std::uint8_t> first;  // length + 1
  std::vector<int> actions;
  std::vector<double> rewards;    // environment rewards
  std::vector<double> discounts;  // environment discounts (0 at terminals and masked steps)
  nn::Mat<T> behavior_logits;     // length x actions
  nn::LstmState<T> initial_state;  // 1 x width, state entering step 0
  nn::Mat<T> representations;     // length x rep, stored for SR memory
  nn::Mat<T> memory_prefix;       // entries of the episode in progress before step 0
  std::uint64_t param_version = 0;
  int actor = 0;

  void validate() const {
    const auto n = static_cast<std::size_t>(length);
    if (length < 1 || observations.rows() != length + 1 || first.size() != n + 1 || actions.size() != n ||
        rewards.size() != n || discounts.size() != n || behavior_logits.rows() != length ||
        representations.rows() != length || initial_state.hidden.rows() != 1) {
      throw ConfigError("malformed unroll");
    }
    if (memory_prefix.rows() > 0 && memory_prefix.cols() != representations.cols()) {
      throw ConfigError("unroll memory width differs from its representations");
    }
    if (first[0] != 0 && memory_prefix.rows() != 0) throw ConfigError("unroll starts an episode with memory");
  }
};

// B unrolls of equal length in time-major layout: row t * B + b.
template <typename T>
struct UnrollBatch {
  int length = 0;
  int batch = 0;
  std::vector<nn::Mat<T>> observations;  // length + 1 entries, each B x obs
  std::vector<std::vector<std::uint8_t>> first;  // (length + 1) x B
  std::vector<int> actions;
  nn::Mat<T> rewards;    // TB x 1
  nn::Mat<T> discounts;  // TB x 1
  nn::Mat<T> behavior_logits;  // TB x A
  nn::LstmState<T> initial_state;  // B x width
  sr::SABatch<T> sa;  // rewards, representations and memory ranges, samples in time-major order
  std::vector<std::uint64_t> param_versions;

  int steps() const { return length * batch; }
  int row(int t, int b) const { return t * batch + b; }
};

template <typename T>
UnrollBatch<T> stack_unrolls(const std::vector<const Unroll<T>*>& unrolls) {
  if (unrolls.empty()) throw ConfigError("empty unroll batch");
  UnrollBatch<T> out;
  out.length = unrolls[0]->length;
  out.batch = static_cast<int>(unrolls.size());
  const int B = out.batch, L = out.length;
  const auto obs_size = unrolls[0]->observations.cols();
  const auto actions = unrolls[0]->behavior_logits.cols();
  const auto width = unrolls[0]->initial_state.hidden.cols();
  const auto rep = unrolls[0]->representations.cols();
  for (const auto* u : unrolls) {
    u->validate();
    if (u->length != L || u->observations.cols() != obs_size || u->behavior_logits.cols() != actions ||
        u->initial_state.hidden.cols() != width || u->representations.cols() != rep) {
      throw ConfigError("unrolls in a batch must share length and widths");
    }
  }
  out.observations.assign(static_cast<std::size_t>(L + 1), nn::Mat<T>(B, obs_size));
  out.first.assign(static_cast<std::size_t>(L + 1), std::vector<std::uint8_t>(static_cast<std::size_t>(B)));
  out.actions.resize(static_cast<std::size_t>(L * B));
  out.rewards.resize(L * B, 1);
  out.discounts.resize(L * B, 1);
  out.behavior_logits.resize(L * B, actions);
  out.initial_state = nn::LstmState<T>::zeros(B, width);

  int table_rows = 0;
  std::vector<int> offset(static_cast<std::size_t>(B));
  for (int b = 0; b < B; ++b) {
    offset[b] = table_rows;
    table_rows += static_cast<int>(unrolls[b]->memory_prefix.rows()) + L;
  }
  auto& sa = out.sa;
  sa.rows.resize(table_rows, rep);
  sa.current.resize(static_cast<std::size_t>(L * B));
  sa.prefix.resize(static_cast<std::size_t>(L * B));
  sa.rewards.resize(L * B, 1);

  for (int b = 0; b < B; ++b) {
    const auto& u = *unrolls[b];
    out.param_versions.push_back(u.param_version);
    out.initial_state.hidden.row(b) = u.initial_state.hidden.row(0);
    out.initial_state.cell.row(b) = u.initial_state.cell.row(0);
    const int p = static_cast<int>(u.memory_prefix.rows());
    if (p > 0) sa.rows.middleRows(offset[b], p) = u.memory_prefix;
    sa.rows.middleRows(offset[b] + p, L) = u.representations;
    int episode_start = offset[b];
    for (int t = 0; t <= L; ++t) {
      out.observations[t].row(b) = u.observations.row(t);
      out.first[t][b] = u.first[t];
      if (t == L) break;
      const int r = out.row(t, b);
      const int here = offset[b] + p + t;
      if (u.first[t]) episode_start = here;
      out.actions[r] = u.actions[t];
      out.rewards(r, 0) = static_cast<T>(u.rewards[t]);
      out.discounts(r, 0) = static_cast<T>(u.discounts[t]);
      out.behavior_logits.row(r) = u.behavior_logits.row(t);
      sa.current[r] = here;
      sa.prefix[r] = {episode_start, here};
      sa.rewards(r, 0) = static_cast<T>(u.rewards[t]);
    }
  }
  return out;
}

}  // namespace sacredit::agent

#endif  // SACREDIT_AGENT_UNROLL_HPP_
