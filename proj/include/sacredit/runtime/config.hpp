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


#ifndef SACREDIT_RUNTIME_CONFIG_HPP_
#define SACREDIT_RUNTIME_CONFIG_HPP_

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "sacredit/agent/config.hpp"
#include "sacredit/envs/task.hpp"
#include "sacredit/errors.hpp"
#include "sacredit/nn/optimizer.hpp"
#include "sacredit/sr/config.hpp"

namespace sacredit::runtime {

struct RunConfig {
  std::uint64_t seed = 1;
  int unroll_length = 20;
  int batch_size = 32;
  int actors = 8;
  std::int64_t total_steps = 5'000'000;  // environment steps
  bool deterministic = false;            // one actor, synchronous stepping
  int queue_capacity = 0;                // 0 -> 2 x batch_size
  std::int64_t log_every = 50'000;       // environment steps per metrics row
  std::int64_t checkpoint_every = 0;     // environment steps; 0 -> only at the end
  int trace_every = 0;                   // every n-th episode of the first actor environment is traced; 0 -> none
  int stat_window = 100;                 // episodes in the rolling averages
  double target_return = std::numeric_limits<double>::quiet_NaN();  // stop once reached
};

struct ExperimentConfig {
  envs::TaskConfig task;
  bool sr_enabled = true;
  sr::SRConfig sr;
  agent::AgentConfig agent;
  nn::OptimizerConfig optim;
  RunConfig run;

  int queue_capacity() const { return run.queue_capacity > 0 ? run.queue_capacity : 2 * run.batch_size; }
  int actor_count() const { return run.deterministic ? 1 : run.actors; }

  void validate() const {
    task.validate();
    sr.validate();
    agent.validate();
    optim.validate();
    if (run.unroll_length < 1) throw ConfigError("run.unroll_length must be >= 1");
    if (run.batch_size < 1) throw ConfigError("run.batch_size must be >= 1");
    if (run.actors < 1) throw ConfigError("run.actors must be >= 1");
    if (run.total_steps < 0) throw ConfigError("run.total_steps must be >= 0");
    if (run.queue_capacity < 0) throw ConfigError("run.queue_capacity must be >= 0");
    if (run.queue_capacity > 0 && run.queue_capacity < run.batch_size) {
      throw ConfigError("run.queue_capacity must hold at least one batch");
    }
    if (run.log_every < 1) throw ConfigError("run.log_every must be >= 1");
    if (run.checkpoint_every < 0 || run.trace_every < 0) throw ConfigError("run cadences must be >= 0");
    if (run.stat_window < 1) throw ConfigError("run.stat_window must be >= 1");
  }
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round-trip form
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& key, const std::string& v) {
  if (v == "nan" || v == "none") return std::numeric_limits<double>::quiet_NaN();
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != v.size() || v.empty()) throw ConfigError(key + ": expected a number, got '" + v + "'");
  return out;
}

inline std::int64_t parse_int(const std::string& key, const std::string& v) {
  const double d = parse_double(key, v);
  if (!(std::floor(d) == d) || std::abs(d) > 9.0e15) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return static_cast<std::int64_t>(d);
}

inline bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError(key + ": expected a boolean, got '" + v + "'");
}

inline std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(static_cast<int>(parse_int(key, trim(item))));
  return out;
}

inline std::string format_int_list(const std::vector<int>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
  return out;
}

struct Field {
  std::function<std::string()> get;
  std::function<void(const std::string&)> set;
};

// Every configurable key, in a fixed order, bound to `cfg`.
inline std::vector<std::pair<std::string, Field>> fields(ExperimentConfig& cfg) {
  std::vector<std::pair<std::string, Field>> f;
  auto num = [&f](const std::string& key, double& target) {
    f.push_back({key, {[&target] { return format_double(target); },
                       [key, &target](const std::string& v) { target = parse_double(key, v); }}});
  };
  auto int_ = [&f](const std::string& key, auto& target) {
    using I = std::decay_t<decltype(target)>;
    f.push_back({key, {[&target] { return std::to_string(target); },
                       [key, &target](const std::string& v) { target = static_cast<I>(parse_int(key, v)); }}});
  };
  auto flag = [&f](const std::string& key, bool& target) {
    f.push_back({key, {[&target] { return std::string(target ? "true" : "false"); },
                       [key, &target](const std::string& v) { target = parse_bool(key, v); }}});
  };
  auto list = [&f](const std::string& key, std::vector<int>& target) {
    f.push_back({key, {[&target] { return format_int_list(target); },
                       [key, &target](const std::string& v) { target = parse_int_list(key, v); }}});
  };
  auto choice = [&f](const std::string& key, auto& target, auto to_str, auto from_str) {
    f.push_back({key, {[&target, to_str] { return to_str(target); },
                       [&target, from_str](const std::string& v) { target = from_str(v); }}});
  };

  choice("task.kind", cfg.task.kind, [](envs::TaskKind k) { return envs::to_string(k); }, envs::task_kind_from_string);
  int_("chain.length", cfg.task.chain.length);
  int_("chain.free_steps", cfg.task.chain.free_steps);
  int_("chain.trigger_offset", cfg.task.chain.trigger_offset);
  int_("catch.rows", cfg.task.catch_game.rows);
  int_("catch.cols", cfg.task.catch_game.cols);
  int_("catch.runs", cfg.task.catch_game.runs);
  flag("catch.delayed", cfg.task.catch_game.delayed);
  flag("catch.time_cue", cfg.task.catch_game.time_cue);
  auto& kd = cfg.task.key_to_door;
  int_("keydoor.room", kd.room);
  int_("keydoor.apples", kd.apples);
  int_("keydoor.phase1_steps", kd.phase1_steps);
  int_("keydoor.phase2_steps", kd.phase2_steps);
  int_("keydoor.phase3_steps", kd.phase3_steps);
  num("keydoor.apple_reward", kd.apple_reward);
  num("keydoor.door_reward", kd.door_reward);
  choice("keydoor.variant", kd.variant, [](envs::KeyToDoorVariant v) { return envs::to_string(v); },
         envs::key_to_door_variant_from_string);
  flag("keydoor.time_cue", kd.time_cue);

  flag("sr.enabled", cfg.sr_enabled);
  num("sr.alpha", cfg.sr.alpha);
  num("sr.beta", cfg.sr.beta);
  choice("sr.loss_variant", cfg.sr.loss_variant, [](sr::LossVariant v) { return sr::to_string(v); },
         sr::loss_variant_from_string);
  num("sr.loss_weight", cfg.sr.sr_loss_weight);
  list("sr.c_hidden", cfg.sr.c_hidden);
  list("sr.b_hidden", cfg.sr.b_hidden);
  list("sr.g_hidden", cfg.sr.g_hidden);
  flag("sr.zero_init_outputs", cfg.sr.zero_init_outputs);

  auto& a = cfg.agent;
  choice("agent.encoder", a.encoder, [](agent::EncoderKind k) { return agent::to_string(k); },
         agent::encoder_kind_from_string);
  list("agent.encoder_hidden", a.encoder_hidden);
  list("agent.conv_channels", a.conv_channels);
  int_("agent.conv_kernel", a.conv_kernel);
  int_("agent.lstm_width", a.lstm_width);
  int_("agent.policy_hidden", a.policy_hidden);
  choice("agent.representation", a.representation, [](agent::Representation r) { return agent::to_string(r); },
         agent::representation_from_string);
  num("agent.discount", a.discount);
  num("agent.entropy_cost", a.entropy_cost);
  num("agent.baseline_cost", a.baseline_cost);
  num("agent.rho_bar", a.rho_bar);
  num("agent.c_bar", a.c_bar);

  auto& o = cfg.optim;
  choice("optim.kind", o.kind, [](nn::OptimizerKind k) { return nn::to_string(k); }, nn::optimizer_kind_from_string);
  num("optim.learning_rate", o.learning_rate);
  num("optim.epsilon", o.epsilon);
  num("optim.decay", o.decay);
  num("optim.momentum", o.momentum);
  num("optim.beta1", o.beta1);
  num("optim.beta2", o.beta2);
  num("optim.clip_norm", o.clip_norm);

  auto& r = cfg.run;
  int_("run.seed", r.seed);
  int_("run.unroll_length", r.unroll_length);
  int_("run.batch_size", r.batch_size);
  int_("run.actors", r.actors);
  int_("run.total_steps", r.total_steps);
  flag("run.deterministic", r.deterministic);
  int_("run.queue_capacity", r.queue_capacity);
  int_("run.log_every", r.log_every);
  int_("run.checkpoint_every", r.checkpoint_every);
  int_("run.trace_every", r.trace_every);
  int_("run.stat_window", r.stat_window);
  num("run.target_return", r.target_return);
  return f;
}

}  // namespace detail

// Sets one dotted key; unknown keys and bad values are ConfigErrors.
inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (auto& [k, field] : detail::fields(cfg)) {
    if (k == key) {
      field.set(detail::trim(value));
      return;
    }
  }
  throw ConfigError("unknown config key: " + key);
}

inline std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) {
  ExperimentConfig copy = cfg;  // fields() binds mutable references
  for (auto& [k, field] : detail::fields(copy)) {
    if (k == key) return field.get();
  }
  throw ConfigError("unknown config key: " + key);
}

inline std::vector<std::string> config_keys() {
  ExperimentConfig cfg;
  std::vector<std::string> keys;
  for (auto& [k, _] : detail::fields(cfg)) keys.push_back(k);
  return keys;
}

// Applies "section.key = value" lines; '#' starts a comment. An optional
// "[section]" header prefixes the keys that follow it.
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    std::string key = detail::trim(line.substr(0, eq));
    if (!section.empty() && key.find('.') == std::string::npos) key = section + "." + key;
    try {
      set_config_value(cfg, key, line.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(cfg, ss.str());
}

// SACREDIT_<SECTION>_<KEY> overrides, e.g. SACREDIT_SR_ALPHA=0.1. `lookup`
// defaults to the process environment.
inline std::vector<std::string> apply_env_overrides(
    ExperimentConfig& cfg, const std::function<const char*(const std::string&)>& lookup = [](const std::string& n) {
      return std::getenv(n.c_str());
    }) {
  std::vector<std::string> applied;
  for (const auto& key : config_keys()) {
    std::string name = "SACREDIT_";
    for (char ch : key) name += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    if (const char* v = lookup(name)) {
      set_config_value(cfg, key, v);
      applied.push_back(key);
    }
  }
  return applied;
}

// Canonical text: every key in registry order.
inline std::string config_to_text(const ExperimentConfig& cfg) {
  std::string out;
  ExperimentConfig copy = cfg;  // fields() binds mutable references
  for (auto& [k, field] : detail::fields(copy)) out += k + " = " + field.get() + "\n";
  return out;
}

inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  ExperimentConfig copy = cfg;  // fields() binds mutable references
  for (auto& [k, field] : detail::fields(copy)) {
    const auto dot = k.find('.');
    j[k.substr(0, dot)][k.substr(dot + 1)] = field.get();
  }
  return j;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

// Hash of everything that shapes the model and its data; run cadences and
// budgets are excluded so a resumed run may extend its budget.
inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::string text;
  ExperimentConfig copy = cfg;  // fields() binds mutable references
  for (auto& [k, field] : detail::fields(copy)) {
    if (k == "run.total_steps" || k == "run.log_every" || k == "run.checkpoint_every" || k == "run.trace_every" ||
        k == "run.target_return") {
      continue;
    }
    text += k + "=" + field.get() + "\n";
  }
  return fnv1a(text);
}

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_CONFIG_HPP_
