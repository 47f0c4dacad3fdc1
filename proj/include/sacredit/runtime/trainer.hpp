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


#ifndef SACREDIT_RUNTIME_TRAINER_HPP_
#define SACREDIT_RUNTIME_TRAINER_HPP_

#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/random.hpp"
#include "sacredit/runtime/actor.hpp"
#include "sacredit/runtime/blob.hpp"
#include "sacredit/runtime/checkpoint.hpp"
#include "sacredit/runtime/config.hpp"
#include "sacredit/runtime/metrics.hpp"
#include "sacredit/runtime/model.hpp"
#include "sacredit/runtime/queue.hpp"
#include "sacredit/sr/trace.hpp"

namespace sacredit::runtime {

struct TrainOptions {
  std::string out_dir;                // empty: nothing is written to disk
  const Checkpoint* resume = nullptr;  // continue from this state
  bool verbose = false;               // progress lines on stderr
  std::size_t keep_traces = 32;       // most recent SR traces kept in the result
};

struct TrainResult {
  MetricsTable metrics;
  Checkpoint checkpoint;
  std::int64_t env_steps = 0;       // consumed by the learner, including resumed steps
  std::int64_t learner_steps = 0;
  std::int64_t produced_steps = 0;  // sum of actor steps in this call
  std::int64_t consumed_steps = 0;  // in this call
  std::int64_t dropped_steps = 0;   // produced in this call but discarded at shutdown
  std::uint64_t max_lag = 0;        // learner version minus behaviour version
  std::size_t unrolls_consumed = 0;
  std::size_t duplicate_unrolls = 0;
  bool reached_target = false;
  double seconds = 0.0;
  std::vector<sr::SRTrace> traces;
};

inline constexpr const char* kParamsPrefix = "params/";

namespace detail {

inline std::string counters_blob(std::int64_t env_steps, std::int64_t learner_steps, std::int64_t next_log,
                                 std::int64_t next_checkpoint) {
  BlobWriter w;
  w.put<std::int64_t>(env_steps);
  w.put<std::int64_t>(learner_steps);
  w.put<std::int64_t>(next_log);
  w.put<std::int64_t>(next_checkpoint);
  return w.str();
}

inline ExperimentConfig config_from_checkpoint(const Checkpoint& ck) {
  ExperimentConfig cfg;
  apply_config_text(cfg, ck.blob("config"));
  cfg.validate();
  return cfg;
}

// Learner-side bookkeeping shared by the synchronous and threaded drivers.
class TrainingSession {
 public:
  TrainingSession(const ExperimentConfig& cfg, const TrainOptions& opts)
      : cfg_(cfg), opts_(opts), model_(cfg), learner_(cfg, model_),
        tracker_(envs::make_environment(cfg.task, 0)->stat_names(), cfg.run.stat_window) {
    model_.initialize(cfg);
    next_log_ = cfg.run.log_every;
    next_checkpoint_ = cfg.run.checkpoint_every;
    result_.metrics.header = tracker_.header();
    if (opts.resume) restore(*opts.resume);
    if (!opts.out_dir.empty()) open_outputs();
  }

  Model& model() { return model_; }
  TrainResult& result() { return result_; }
  std::int64_t env_steps() const { return env_steps_; }
  std::uint64_t version() const { return static_cast<std::uint64_t>(learner_steps_); }
  bool done() const { return env_steps_ >= cfg_.run.total_steps || result_.reached_target; }

  // One learner step on a full batch.
  void consume(std::vector<ActorOutput>& batch) {
    std::vector<const agent::Unroll<float>*> unrolls;
    std::uint64_t lag = 0;
    std::int64_t steps = 0;
    for (auto& o : batch) {
      if (!seen_.insert({o.unroll.actor, o.sequence}).second) ++result_.duplicate_unrolls;
      unrolls.push_back(&o.unroll);
      lag = std::max(lag, version() - o.unroll.param_version);
      steps += o.unroll.length;
      for (const auto& e : o.episodes) tracker_.add_episode(e);
      if (o.log) record_trace(*o.log);
    }
    const LearnerStats stats = learner_.step(unrolls);
    ++learner_steps_;
    env_steps_ += steps;
    result_.consumed_steps += steps;
    result_.unrolls_consumed += batch.size();
    result_.max_lag = std::max(result_.max_lag, lag);
    tracker_.add_learner_step(stats, lag);
    if (!std::isnan(cfg_.run.target_return) && tracker_.window_full() &&
        tracker_.mean_return() >= cfg_.run.target_return) {
      result_.reached_target = true;
    }
    bool emitted = false;
    while (env_steps_ >= next_log_) {
      if (!emitted) emit_row();
      emitted = true;
      next_log_ += cfg_.run.log_every;
    }
    if (result_.reached_target && !emitted) emit_row();
    if (cfg_.run.checkpoint_every > 0 && env_steps_ >= next_checkpoint_ && !done()) {
      while (env_steps_ >= next_checkpoint_) next_checkpoint_ += cfg_.run.checkpoint_every;
      if (!opts_.out_dir.empty()) {
        const auto state = actor_state_ ? std::optional<std::string>(actor_state_()) : std::nullopt;
        save_checkpoint(make_checkpoint(state), checkpoint_path());
      }
    }
  }

  // Supplies the synchronous actor's state for periodic checkpoints.
  void set_actor_state_source(std::function<std::string()> f) { actor_state_ = std::move(f); }

  void finish(const std::optional<std::string>& actor_state) {
    result_.env_steps = env_steps_;
    result_.learner_steps = learner_steps_;
    result_.checkpoint = make_checkpoint(actor_state);
    if (!opts_.out_dir.empty()) save_checkpoint(result_.checkpoint, checkpoint_path());
  }

  Checkpoint make_checkpoint(const std::optional<std::string>& actor_state) const {
    Checkpoint ck;
    ck.config_hash = config_hash(cfg_);
    ck.blobs["config"] = config_to_text(cfg_);
    ck.blobs["counters"] = counters_blob(env_steps_, learner_steps_, next_log_, next_checkpoint_);
    ck.blobs["metrics"] = tracker_.save_state();
    if (actor_state) ck.blobs["actor/0"] = *actor_state;
    put_params(ck, kParamsPrefix, model_.params);
    put_optimizer(ck, learner_.optimizer());
    return ck;
  }

  const Checkpoint* resume() const { return opts_.resume; }

 private:
  void restore(const Checkpoint& ck) {
    if (ck.config_hash != config_hash(cfg_)) {
      throw ConfigError("checkpoint was written by a different configuration");
    }
    get_params(ck, kParamsPrefix, model_.params);
    get_optimizer(ck, learner_.optimizer());
    tracker_.load_state(ck.blob("metrics"));
    BlobReader r(ck.blob("counters"));
    env_steps_ = r.get<std::int64_t>();
    learner_steps_ = r.get<std::int64_t>();
    next_log_ = r.get<std::int64_t>();
    next_checkpoint_ = r.get<std::int64_t>();
    if (next_checkpoint_ <= env_steps_ && cfg_.run.checkpoint_every > 0) {
      while (next_checkpoint_ <= env_steps_) next_checkpoint_ += cfg_.run.checkpoint_every;
    }
  }

  void open_outputs() {
    namespace fs = std::filesystem;
    fs::create_directories(opts_.out_dir);
    const fs::path dir(opts_.out_dir);
    {
      std::ofstream meta(dir / "config.json");
      meta << config_to_json(cfg_).dump(2) << '\n';
    }
    const fs::path metrics = dir / "metrics.csv";
    const bool append = opts_.resume && fs::exists(metrics);
    metrics_out_.open(metrics, append ? std::ios::app : std::ios::trunc);
    if (!metrics_out_) throw FormatError("cannot write " + metrics.string());
    if (!append) write_csv_header(metrics_out_, result_.metrics.header);
    metrics_out_.flush();
    if (cfg_.run.trace_every > 0 && model_.head) {
      traces_out_.open(dir / "traces.jsonl", opts_.resume ? std::ios::app : std::ios::trunc);
    }
  }

  std::string checkpoint_path() const { return (std::filesystem::path(opts_.out_dir) / "checkpoint.bin").string(); }

  void emit_row() {
    auto row = tracker_.row(env_steps_, learner_steps_);
    if (metrics_out_.is_open()) {
      write_csv_row(metrics_out_, row);
      metrics_out_.flush();
    }
    if (opts_.verbose) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
      std::cerr << "steps " << env_steps_ << "  episodes " << tracker_.episodes() << "  return "
                << format_metric(tracker_.mean_return()) << "  loss " << format_metric(row[static_cast<std::size_t>(result_.metrics.column("loss_total"))])
                << "  " << static_cast<long long>(static_cast<double>(result_.consumed_steps) / std::max(secs, 1e-9))
                << " steps/s\n";
    }
    result_.metrics.rows.push_back(std::move(row));
  }

  void record_trace(const EpisodeLog& log) {
    if (!model_.head) return;
    auto trace = sr::extract_sr_trace(*model_.head, model_.params, log.representations, log.rewards, log.events);
    if (traces_out_.is_open()) {
      sr::write_sr_trace_jsonl(trace, traces_out_);
      traces_out_.flush();
    }
    result_.traces.push_back(std::move(trace));
    if (result_.traces.size() > opts_.keep_traces) result_.traces.erase(result_.traces.begin());
  }

  const ExperimentConfig& cfg_;
  const TrainOptions& opts_;
  Model model_;
  Learner learner_;
  MetricsTracker tracker_;
  TrainResult result_;
  std::int64_t env_steps_ = 0;
  std::int64_t learner_steps_ = 0;
  std::int64_t next_log_ = 0;
  std::int64_t next_checkpoint_ = 0;
  std::set<std::pair<int, std::uint64_t>> seen_;
  std::function<std::string()> actor_state_;
  std::ofstream metrics_out_;
  std::ofstream traces_out_;
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

inline std::uint64_t actor_seed(const ExperimentConfig& cfg, int id) {
  return derive_seed(cfg.run.seed, stream_tag("actor") + static_cast<std::uint64_t>(id));
}

inline void run_synchronous(const ExperimentConfig& cfg, TrainingSession& session) {
  ActorOptions ao;
  ao.slots = cfg.run.batch_size;
  ao.log_every = cfg.run.trace_every;
  Actor actor(cfg, session.model(), 0, ao, actor_seed(cfg, 0));
  if (session.resume()) {
    const auto& blobs = session.resume()->blobs;
    if (auto it = blobs.find("actor/0"); it != blobs.end()) actor.load_state(it->second);
  }
  session.set_actor_state_source([&actor] { return actor.save_state(); });
  const std::int64_t start = actor.steps();
  while (!session.done()) {
    auto outs = actor.produce(session.model().params, session.version(), cfg.run.unroll_length);
    session.consume(outs);
  }
  session.result().produced_steps = actor.steps() - start;
  session.set_actor_state_source(nullptr);
  session.finish(actor.save_state());
}

// Parameters published by the learner; actors copy the pointer under the lock.
struct ParamSnapshot {
  std::shared_ptr<const nn::ParamSet<float>> params;
  std::uint64_t version = 0;
};

class Publisher {
 public:
  void publish(ParamSnapshot s) {
    std::lock_guard lock(mu_);
    current_ = std::move(s);
  }
  ParamSnapshot get() const {
    std::lock_guard lock(mu_);
    return current_;
  }

 private:
  mutable std::mutex mu_;
  ParamSnapshot current_;
};

inline void run_threaded(const ExperimentConfig& cfg, TrainingSession& session) {
  const int n = cfg.actor_count();
  BoundedQueue<ActorOutput> queue(static_cast<std::size_t>(cfg.queue_capacity()));
  Publisher publisher;
  publisher.publish({std::make_shared<const nn::ParamSet<float>>(session.model().params), session.version()});

  std::vector<std::unique_ptr<Actor>> actors;
  for (int i = 0; i < n; ++i) {
    ActorOptions ao;
    ao.slots = std::max(1, cfg.run.batch_size / n);
    ao.log_every = i == 0 ? cfg.run.trace_every : 0;
    actors.push_back(std::make_unique<Actor>(cfg, session.model(), i, ao, actor_seed(cfg, i)));
  }
  std::vector<std::int64_t> discarded(static_cast<std::size_t>(n), 0);
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::vector<std::thread> threads;
  for (int i = 0; i < n; ++i) {
    threads.emplace_back([&, i] {
      try {
        bool open = true;
        while (open) {
          const ParamSnapshot snap = publisher.get();
          auto outs = actors[i]->produce(*snap.params, snap.version, cfg.run.unroll_length);
          for (auto& o : outs) {
            const int len = o.unroll.length;
            if (!open || !queue.push(std::move(o))) {
              open = false;
              discarded[i] += len;
            }
          }
        }
      } catch (...) {
        errors[i] = std::current_exception();
        queue.close();
      }
    });
  }

  std::exception_ptr learner_error;
  try {
    while (!session.done()) {
      std::vector<ActorOutput> batch;
      while (static_cast<int>(batch.size()) < cfg.run.batch_size) {
        auto item = queue.pop();
        if (!item) break;
        batch.push_back(std::move(*item));
      }
      if (static_cast<int>(batch.size()) < cfg.run.batch_size) {
        for (const auto& o : batch) discarded[0] += o.unroll.length;
        break;
      }
      session.consume(batch);
      publisher.publish({std::make_shared<const nn::ParamSet<float>>(session.model().params), session.version()});
    }
  } catch (...) {
    learner_error = std::current_exception();
  }
  queue.close();
  for (auto& t : threads) t.join();
  std::int64_t dropped = 0;
  for (const auto& o : queue.drain()) dropped += o.unroll.length;
  for (auto d : discarded) dropped += d;
  std::int64_t produced = 0;
  for (const auto& a : actors) produced += a->steps();
  session.result().produced_steps = produced;
  session.result().dropped_steps = dropped;
  if (learner_error) std::rethrow_exception(learner_error);
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  session.finish(std::nullopt);
}

}  // namespace detail

// Trains until the environment-step budget (or the target return) is reached.
// Deterministic mode steps one actor holding batch_size environments in
// lockstep with the learner; otherwise actor threads feed a bounded queue.
inline TrainResult run_training(const ExperimentConfig& cfg, const TrainOptions& opts = {}) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  detail::TrainingSession session(cfg, opts);
  if (cfg.run.deterministic) {
    detail::run_synchronous(cfg, session);
  } else if (session.done()) {
    session.finish(std::nullopt);
  } else {
    detail::run_threaded(cfg, session);
  }
  TrainResult result = std::move(session.result());
  result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

struct EvalOptions {
  int episodes = 100;
  std::uint64_t seed = 12345;
  bool greedy = false;
  bool traces = true;  // record an SR trace for every episode (SR models only)
};

struct EvalResult {
  MetricsTable metrics;  // a single row
  std::vector<EpisodeRecord> episodes;
  std::vector<sr::SRTrace> traces;
};

// Rolls out the checkpointed policy on `task`, which must be the task it was
// trained on up to parameters that leave observations and actions unchanged.
inline EvalResult evaluate(const Checkpoint& ck, const envs::TaskConfig& task, const EvalOptions& opts = {}) {
  if (opts.episodes < 1) throw ConfigError("evaluate needs at least one episode");
  ExperimentConfig cfg = detail::config_from_checkpoint(ck);
  if (task.kind != cfg.task.kind) {
    throw ConfigError("checkpoint was trained on " + envs::to_string(cfg.task.kind) + ", not " +
                      envs::to_string(task.kind));
  }
  {
    const Model trained(cfg);
    const auto env = envs::make_environment(task, 0);
    if (env->observation_shape() != trained.obs_shape || env->num_actions() != trained.num_actions) {
      throw ConfigError("task geometry differs from the checkpoint's");
    }
  }
  cfg.task = task;
  Model eval_model(cfg);
  get_params(ck, kParamsPrefix, eval_model.params);

  ActorOptions ao;
  ao.slots = 1;
  ao.greedy = opts.greedy;
  ao.log_every = opts.traces && eval_model.head ? 1 : 0;
  Actor actor(cfg, eval_model, 0, ao, derive_seed(opts.seed, stream_tag("eval")));
  EvalResult out;
  const int length = std::max(1, eval_model.memory_capacity);
  while (static_cast<int>(out.episodes.size()) < opts.episodes) {
    auto outs = actor.produce(eval_model.params, 0, length);
    for (auto& o : outs) {
      for (auto& e : o.episodes) {
        if (static_cast<int>(out.episodes.size()) < opts.episodes) out.episodes.push_back(e);
      }
      if (o.log && static_cast<int>(out.traces.size()) < opts.episodes) {
        out.traces.push_back(sr::extract_sr_trace(*eval_model.head, eval_model.params, o.log->representations,
                                                  o.log->rewards, o.log->events));
      }
    }
  }
  const auto names = envs::make_environment(task, 0)->stat_names();
  out.metrics.header = {"episodes", "mean_return", "std_return"};
  for (const auto& s : names) out.metrics.header.push_back("mean_" + s);
  double sum = 0.0, sq = 0.0;
  for (const auto& e : out.episodes) {
    sum += e.episode_return;
    sq += e.episode_return * e.episode_return;
  }
  const double n = static_cast<double>(out.episodes.size());
  const double mean = sum / n;
  std::vector<double> row{n, mean, std::sqrt(std::max(0.0, sq / n - mean * mean))};
  for (std::size_t k = 0; k < names.size(); ++k) {
    double s = 0.0;
    for (const auto& e : out.episodes) s += e.stats[k];
    row.push_back(s / n);
  }
  out.metrics.rows.push_back(std::move(row));
  return out;
}

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_TRAINER_HPP_
