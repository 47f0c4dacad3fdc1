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


#ifndef SACREDIT_SR_TRACE_HPP_
#define SACREDIT_SR_TRACE_HPP_

#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sacredit/errors.hpp"
#include "sacredit/nn/graph.hpp"
#include "sacredit/sr/head.hpp"

namespace sacredit::sr {

struct SRTraceRecord {
  int step = 0;
  double c = 0.0;
  double g = 0.0;
  double b = 0.0;
  double reward = 0.0;
  std::string event;
};

// One record per timestep of one episode.
using SRTrace = std::vector<SRTraceRecord>;

// reps: one row per episode step; rewards and events aligned with it.
template <typename T>
SRTrace extract_sr_trace(const SRHead<T>& head, const nn::ParamSet<T>& params, const nn::Mat<T>& reps,
                         const std::vector<double>& rewards, const std::vector<std::string>& events) {
  if (static_cast<std::size_t>(reps.rows()) != rewards.size() || rewards.size() != events.size()) {
    throw ConfigError("SR trace: representations, rewards and events must align");
  }
  SRTrace trace(rewards.size());
  if (trace.empty()) return trace;
  nn::Graph<T> g(false);
  const nn::Var x = g.constant(reps);
  const auto& c = g.value(head.contribution(g, params, x));
  const auto& gate = g.value(head.gate(g, params, x));
  const auto& b = g.value(head.bias(g, params, x));
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const auto i = static_cast<Eigen::Index>(t);
    trace[t] = {static_cast<int>(t), static_cast<double>(c(i, 0)), static_cast<double>(gate(i, 0)),
                static_cast<double>(b(i, 0)), rewards[t], events[t]};
  }
  return trace;
}

inline nlohmann::json to_json(const SRTraceRecord& r) {
  return {{"step", r.step}, {"c", r.c}, {"g", r.g}, {"b", r.b}, {"reward", r.reward}, {"event", r.event}};
}

inline void write_sr_trace_jsonl(const SRTrace& trace, std::ostream& out) {
  for (const auto& r : trace) out << to_json(r).dump() << '\n';
}

// Reads concatenated episodes; a record with step 0 starts a new episode.
inline std::vector<SRTrace> read_sr_traces_jsonl(std::istream& in) {
  std::vector<SRTrace> episodes;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    SRTraceRecord r;
    try {
      const auto j = nlohmann::json::parse(line);
      r.step = j.at("step").get<int>();
      r.c = j.at("c").get<double>();
      r.g = j.at("g").get<double>();
      r.b = j.at("b").get<double>();
      r.reward = j.at("reward").get<double>();
      r.event = j.at("event").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("SR trace line " + std::to_string(line_no) + ": " + e.what());
    }
    if (r.step == 0 || episodes.empty()) episodes.emplace_back();
    episodes.back().push_back(std::move(r));
  }
  return episodes;
}

}  // namespace sacredit::sr

#endif  // SACREDIT_SR_TRACE_HPP_
