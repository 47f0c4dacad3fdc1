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

#ifndef SACREDIT_ENVS_CATCH_HPP_
#define SACREDIT_ENVS_CATCH_HPP_

#include <algorithm>
#include <sstream>
#include <string>
#include <vector>

#include "sacredit/envs/environment.hpp"
#include "sacredit/random.hpp"

namespace sacredit::envs {

struct CatchConfig {
  int rows = 7;
  int cols = 7;
  int runs = 10;
  bool delayed = false;
  // Appends a constant "steps remaining" plane (fraction of the episode left).
  bool time_cue = true;

  int run_steps() const { return rows; }
  int episode_steps() const { return runs * rows; }
  int channels() const { return time_cue ? 2 : 1; }

  void validate() const {
    if (rows < 2 || cols < 1) throw ConfigError("catch grid too small");
    if (runs < 1) throw ConfigError("catch needs at least one run per episode");
  }
};

// Catch. A ball spawns in a random column of the top row and falls one row per
// step; the paddle sits on the bottom row and moves left/stay/right (clamped).
// A run lasts `rows` steps including the spawn frame and the catch is decided
// when the ball enters the bottom row. Standard: +1 on that step. Delayed: the
// number of catches is paid out on the final step of the episode instead.
class CatchEnv : public Environment {
 public:
  CatchEnv(CatchConfig cfg, std::uint64_t seed) : cfg_(cfg), rng_(seed) { cfg_.validate(); }

  std::string name() const override { return cfg_.delayed ? "catch-delayed" : "catch"; }
  int num_actions() const override { return 3; }
  std::vector<int> observation_shape() const override { return {cfg_.rows, cfg_.cols, cfg_.channels()}; }
  int max_episode_steps() const override { return cfg_.episode_steps(); }
  const CatchConfig& config() const { return cfg_; }
  int ball_row() const { return ball_row_; }
  int ball_col() const { return ball_col_; }
  int paddle_col() const { return paddle_; }

  // Forces the ball column of the current run (used to replay runs in tests).
  void set_ball_col(int col) { ball_col_ = std::clamp(col, 0, cfg_.cols - 1); }

  EnvStep reset() override {
    run_ = 0;
    step_ = 0;
    catches_ = 0;
    paddle_ = cfg_.cols / 2;
    done_ = false;
    spawn();
    return make(0.0, 1.0, false, "");
  }

  EnvStep step(int action) override {
    if (done_) throw UsageError("step() after the episode ended");
    check_action(action, 3);
    ++step_;
    paddle_ = std::clamp(paddle_ + action - 1, 0, cfg_.cols - 1);
    if (ball_row_ < cfg_.rows - 1) {
      ++ball_row_;
      if (ball_row_ == cfg_.rows - 1) {
        const bool caught = paddle_ == ball_col_;
        catches_ += caught ? 1 : 0;
        const double reward = (!cfg_.delayed && caught) ? 1.0 : 0.0;
        return make(reward, 1.0, false, caught ? "catch" : "miss");
      }
      return make(0.0, 1.0, false, "");
    }
    ++run_;
    if (run_ == cfg_.runs) {
      done_ = true;
      return make(cfg_.delayed ? static_cast<double>(catches_) : 0.0, 0.0, true, "end");
    }
    spawn();
    return make(0.0, 1.0, false, "");
  }

  std::vector<std::string> stat_names() const override { return {"catches", "runs"}; }
  std::vector<double> episode_stats() const override {
    return {static_cast<double>(catches_), static_cast<double>(cfg_.runs)};
  }

  std::string save_state() const override {
    std::ostringstream os;
    os << run_ << ' ' << step_ << ' ' << catches_ << ' ' << paddle_ << ' ' << ball_row_ << ' ' << ball_col_ << ' '
       << done_ << ' ' << rng_;
    return os.str();
  }
  void load_state(const std::string& state) override {
    std::istringstream is(state);
    if (!(is >> run_ >> step_ >> catches_ >> paddle_ >> ball_row_ >> ball_col_ >> done_ >> rng_)) {
      throw FormatError("bad catch state");
    }
  }

 private:
  void spawn() {
    ball_row_ = 0;
    ball_col_ = uniform_int(rng_, cfg_.cols);
  }

  EnvStep make(double reward, double discount, bool terminal, std::string event) const {
    EnvStep s;
    const int channels = cfg_.channels();
    s.observation.assign(static_cast<std::size_t>(cfg_.rows * cfg_.cols * channels), 0.0f);
    auto at = [&](int r, int c, int ch) -> float& {
      return s.observation[static_cast<std::size_t>((r * cfg_.cols + c) * channels + ch)];
    };
    at(ball_row_, ball_col_, 0) = 1.0f;
    at(cfg_.rows - 1, paddle_, 0) = 1.0f;
    if (cfg_.time_cue) {
      const float left = static_cast<float>(cfg_.episode_steps() - step_) / static_cast<float>(cfg_.episode_steps());
      for (int r = 0; r < cfg_.rows; ++r) {
        for (int c = 0; c < cfg_.cols; ++c) at(r, c, 1) = left;
      }
    }
    s.reward = reward;
    s.discount = discount;
    s.terminal = terminal;
    s.step_index = step_;
    s.event = std::move(event);
    return s;
  }

  CatchConfig cfg_;
  Rng rng_;
  int run_ = 0;
  int step_ = 0;
  int catches_ = 0;
  int paddle_ = 0;
  int ball_row_ = 0;
  int ball_col_ = 0;
  bool done_ = true;
};

}  // namespace sacredit::envs

#endif  // SACREDIT_ENVS_CATCH_HPP_
