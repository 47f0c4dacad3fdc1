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

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include "gtest/gtest.h"
#include "sacredit/envs/catch.hpp"
#include "sacredit/envs/chain.hpp"
#include "sacredit/envs/key_to_door.hpp"
#include "sacredit/envs/task.hpp"

namespace sacredit::envs {
namespace {

int argmax(const std::vector<float>& v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

int active(const std::vector<float>& v) {
  return static_cast<int>(std::count_if(v.begin(), v.end(), [](float x) { return x != 0.0f; }));
}

// ---- chain -----------------------------------------------------------------

TEST(ChainTest, ResetIsOneHotAtCentre) {
  ChainEnv env;
  EnvStep s = env.reset();
  EXPECT_EQ(s.observation.size(), 18u);
  EXPECT_EQ(active(s.observation), 1);
  EXPECT_EQ(argmax(s.observation), 8);
  EXPECT_EQ(s.step_index, 0);
  EXPECT_EQ(s.reward, 0.0);
  EXPECT_FALSE(s.terminal);
}

TEST(ChainTest, UnvisitedTriggerPaysNothing) {
  ChainEnv env;
  EnvStep s = env.reset();
  int t = 0;
  while (!s.terminal) s = env.step(t++ % 2 == 0 ? 1 : 0);  // hovers around the centre
  EXPECT_EQ(s.reward, 0.0);
}

TEST(ChainTest, VisitingTriggerPaysOneAfterMaskedTransition) {
  ChainEnv env;
  EnvStep s = env.reset();
  for (int i = 0; i < 10; ++i) s = env.step(i < 7 ? 1 : 0);
  EXPECT_TRUE(env.trigger_visited());
  s = env.step(0);
  EXPECT_EQ(s.discount, 0.0);
  EXPECT_EQ(s.reward, 0.0);
  EXPECT_FALSE(s.terminal);
  EXPECT_EQ(argmax(s.observation), 17);
  s = env.step(1);
  EXPECT_TRUE(s.terminal);
  EXPECT_EQ(s.reward, 1.0);
  EXPECT_THROW(env.step(0), UsageError);
}

TEST(ChainTest, OneMaskedStepAndConstantLengthForAnyActions) {
  Rng rng(11);
  ChainEnv env;
  for (int episode = 0; episode < 200; ++episode) {
    EnvStep s = env.reset();
    int steps = 0, masked_before_terminal = 0;
    while (!s.terminal) {
      s = env.step(uniform_int(rng, 2));
      ++steps;
      ASSERT_EQ(active(s.observation), 1);
      if (!s.terminal && s.discount == 0.0) ++masked_before_terminal;
      if (s.terminal) {
        EXPECT_EQ(s.discount, 0.0);
      }
    }
    EXPECT_EQ(steps, 12);
    EXPECT_EQ(masked_before_terminal, 1);
  }
}

TEST(ChainTest, MovingPastAnEndIsANoOp) {
  ChainEnv env(ChainConfig{5, 6, 2});
  env.reset();
  for (int i = 0; i < 5; ++i) env.step(0);
  EXPECT_EQ(env.position(), -2);
}

TEST(ChainTest, InvalidConfigs) {
  EXPECT_THROW(ChainEnv(ChainConfig{16, 10, 7}), ConfigError);
  EXPECT_THROW(ChainEnv(ChainConfig{17, 10, 11}), ConfigError);
  EXPECT_THROW(ChainEnv(ChainConfig{17, 5, 7}), ConfigError);
  EXPECT_THROW(make_environment(TaskConfig{TaskKind::kChain, ChainConfig{17, 0, 0}, {}, {}}, 0), ConfigError);
}

TEST(ChainVisitRateTest, ExactEnumeration) {
  // 10-step walks whose running maximum reaches +7: by reflection,
  // 2 * P(S_10 >= 8) = 2 * (C(10,9) + C(10,10)) / 1024 = 22 / 1024.
  EXPECT_DOUBLE_EQ(trigger_visit_rate_exact(ChainConfig{}), 22.0 / 1024.0);
  EXPECT_EQ(trigger_visit_rate_exact(ChainConfig{17, 10, 11}), 0.0);
  EXPECT_EQ(trigger_visit_rate_exact(ChainConfig{17, 10, 0}), 1.0);
}

TEST(ChainVisitRateTest, MonteCarloAgreesWithEnumeration) {
  Rng rng(12);
  const auto mc = random_policy_visit_rate(ChainConfig{}, 20000, rng);
  const double exact = trigger_visit_rate_exact(ChainConfig{});
  const double sigma = std::sqrt(exact * (1 - exact) / mc.episodes);
  EXPECT_LT(std::abs(mc.estimate - exact), 3 * sigma);
  Rng rng2(1);
  EXPECT_EQ(random_policy_visit_rate(ChainConfig{17, 10, 11}, 10, rng2).estimate, 0.0);
  EXPECT_EQ(random_policy_visit_rate(ChainConfig{17, 10, 0}, 10, rng2).estimate, 1.0);
}

// ---- catch -----------------------------------------------------------------

TEST(CatchTest, ResetHasBallAndPaddle) {
  CatchEnv env(CatchConfig{}, 3);
  EnvStep s = env.reset();
  int pixels = 0;
  for (std::size_t i = 0; i < s.observation.size(); i += 2) pixels += s.observation[i] != 0.0f ? 1 : 0;
  EXPECT_EQ(pixels, 2);
  EXPECT_EQ(env.paddle_col(), 3);
  EXPECT_EQ(env.ball_row(), 0);
  EXPECT_FLOAT_EQ(s.observation[1], 1.0f);  // steps-remaining plane
}

// Chases the ball for the first `wanted` runs and dodges it afterwards.
int scripted_catch_action(const CatchEnv& env, int run, int wanted) {
  const int cols = env.config().cols;
  const int target = run < wanted ? env.ball_col() : (env.ball_col() + cols / 2) % cols;
  if (env.paddle_col() < target) return 2;
  if (env.paddle_col() > target) return 0;
  return 1;
}

TEST(CatchTest, DelayedPaysTotalOnFinalStep) {
  CatchConfig cfg;
  cfg.runs = 20;
  cfg.delayed = true;
  CatchEnv env(cfg, 5);
  EnvStep s = env.reset();
  int step = 0;
  std::vector<double> rewards;
  while (!s.terminal) {
    s = env.step(scripted_catch_action(env, step / cfg.rows, 7));
    ++step;
    rewards.push_back(s.reward);
  }
  ASSERT_EQ(rewards.size(), 140u);
  for (std::size_t i = 0; i + 1 < rewards.size(); ++i) EXPECT_EQ(rewards[i], 0.0);
  EXPECT_EQ(rewards.back(), 7.0);
  EXPECT_EQ(env.episode_stats()[0], 7.0);
}

TEST(CatchTest, DelayConservesTotalReward) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    CatchConfig standard;
    standard.runs = 5 + static_cast<int>(seed % 4);
    CatchConfig delayed = standard;
    delayed.delayed = true;
    CatchEnv a(standard, seed), b(delayed, seed);
    Rng actions(seed + 100);
    EnvStep sa = a.reset(), sb = b.reset();
    double ra = 0.0, rb = 0.0;
    int steps = 0;
    while (!sa.terminal) {
      ASSERT_FALSE(sb.terminal);
      const int act = steps % 3 == 0 ? uniform_int(actions, 3) : scripted_catch_action(a, 0, 1);
      sa = a.step(act);
      sb = b.step(act);
      ra += sa.reward;
      rb += sb.reward;
      ++steps;
    }
    EXPECT_TRUE(sb.terminal);
    EXPECT_EQ(steps, standard.episode_steps());
    EXPECT_EQ(ra, rb);
  }
}

TEST(CatchTest, StandardPaysOnCatch) {
  CatchEnv env(CatchConfig{7, 7, 3, false, false}, 9);
  EnvStep s = env.reset();
  int step = 0;
  double total = 0.0;
  while (!s.terminal) {
    s = env.step(scripted_catch_action(env, step / 7, 3));
    ++step;
    total += s.reward;
    if (s.reward > 0.0) {
      EXPECT_EQ(s.event, "catch");
      EXPECT_EQ(env.ball_row(), 6);
      EXPECT_EQ(active(s.observation), 1);  // ball on the paddle
    }
  }
  EXPECT_EQ(total, 3.0);
  EXPECT_THROW(env.step(1), UsageError);
}

// ---- key-to-door -------------------------------------------------------------

int toward(std::pair<int, int> from, std::pair<int, int> to) {
  if (to.first < from.first) return 0;
  if (to.second > from.second) return 1;
  if (to.first > from.first) return 2;
  return 3;
}

TEST(KeyToDoorTest, KeyPositionsCoverAllCellsUniformly) {
  KeyToDoorEnv env(KeyToDoorConfig{}, 21);
  std::vector<int> counts(36, 0);
  const int samples = 1000;
  for (int i = 0; i < samples; ++i) {
    env.reset();
    ++counts[static_cast<std::size_t>(env.key().first * 6 + env.key().second)];
    ASSERT_NE(env.key(), env.agent());
  }
  const double expected = static_cast<double>(samples) / 36.0;
  double chi2 = 0.0;
  for (int c : counts) {
    EXPECT_GT(c, 0);
    chi2 += (c - expected) * (c - expected) / expected;
  }
  // 99.9th percentile of chi-square with 35 degrees of freedom.
  EXPECT_LT(chi2, 66.62);
}

TEST(KeyToDoorTest, PhaseBoundariesIgnoreActions) {
  Rng rng(22);
  KeyToDoorEnv env(KeyToDoorConfig{}, 23);
  for (int episode = 0; episode < 30; ++episode) {
    EnvStep s = env.reset();
    while (!s.terminal) {
      const int before = s.step_index;
      s = env.step(uniform_int(rng, 4));
      if (s.terminal) break;
      const int expected_phase = s.step_index < 15 ? 1 : (s.step_index < 75 ? 2 : 3);
      ASSERT_EQ(env.phase(), expected_phase) << "step " << before + 1;
      int agents = 0;
      for (std::size_t i = 0; i < s.observation.size(); i += 5) agents += s.observation[i] != 0.0f ? 1 : 0;
      ASSERT_EQ(agents, 1);
    }
    EXPECT_LE(s.step_index, 85);
  }
}

// Plays greedily: key in phase 1 (optional), apples in phase 2, door in phase 3.
// take_key: 0 avoid keys, 1 yellow key, 2 red key.
double play(KeyToDoorEnv& env, int take_key, std::vector<double>* phase3_rewards = nullptr,
            bool* terminated_by_door = nullptr) {
  EnvStep s = env.reset();
  double total = 0.0;
  while (!s.terminal) {
    int action = 0;
    if (env.phase() == 1) {
      if (take_key != 0 && env.held_key() == 0) {
        action = toward(env.agent(), take_key == 2 ? env.red_key() : env.key());
      } else if (take_key == 0) {
        // Any move that does not land on a key.
        static constexpr int dr[4] = {-1, 0, 1, 0};
        static constexpr int dc[4] = {0, 1, 0, -1};
        const int room = env.config().room;
        for (action = 0; action < 4; ++action) {
          std::pair<int, int> t{std::clamp(env.agent().first + dr[action], 0, room - 1),
                                std::clamp(env.agent().second + dc[action], 0, room - 1)};
          if (t != env.key() && t != env.red_key()) break;
        }
      }
    } else if (env.phase() == 2) {
      action = env.apple_cells().empty() ? 0 : toward(env.agent(), env.apple_cells().front());
    } else {
      action = toward(env.agent(), env.door());
    }
    const int phase = env.phase();
    s = env.step(action);
    total += s.reward;
    if (phase == 3 && phase3_rewards != nullptr) phase3_rewards->push_back(s.reward);
  }
  if (terminated_by_door != nullptr) *terminated_by_door = s.event == "door";
  return total;
}

TEST(KeyToDoorTest, StandardKeyThenDoorPaysFive) {
  KeyToDoorEnv env(KeyToDoorConfig{}, 31);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> r3;
    bool by_door = false;
    play(env, 1, &r3, &by_door);
    ASSERT_FALSE(r3.empty());
    EXPECT_TRUE(by_door);
    EXPECT_EQ(r3.back(), 5.0);
    EXPECT_EQ(env.episode_stats()[4], 1.0);
  }
}

TEST(KeyToDoorTest, NoKeyMeansNoDoorReward) {
  KeyToDoorEnv env(KeyToDoorConfig{}, 32);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> r3;
    bool by_door = true;
    play(env, 0, &r3, &by_door);
    ASSERT_EQ(env.held_key(), 0);
    EXPECT_FALSE(by_door);
    EXPECT_EQ(r3.size(), 10u);
    EXPECT_EQ(std::accumulate(r3.begin(), r3.end(), 0.0), 0.0);
  }
}

TEST(KeyToDoorTest, ZeroDoorVariantPenalisesPhaseThreeSteps) {
  KeyToDoorConfig cfg;
  cfg.variant = KeyToDoorVariant::kZeroDoorStepPenalty;
  KeyToDoorEnv env(cfg, 33);
  std::vector<double> r3;
  bool by_door = false;
  play(env, 1, &r3, &by_door);
  ASSERT_TRUE(by_door);
  EXPECT_EQ(r3.back(), 0.0);
  for (std::size_t i = 0; i + 1 < r3.size(); ++i) EXPECT_EQ(r3[i], -1.0);
}

TEST(KeyToDoorTest, TwoKeysVariantRewards) {
  KeyToDoorConfig cfg;
  cfg.variant = KeyToDoorVariant::kTwoKeys;
  KeyToDoorEnv env(cfg, 34);
  for (int colour : {1, 2}) {
    int opened = 0;
    for (int i = 0; i < 20; ++i) {
      std::vector<double> r3;
      bool by_door = false;
      play(env, colour, &r3, &by_door);
      if (!by_door) continue;
      ++opened;
      EXPECT_EQ(r3.back(), env.held_key() == 1 ? -1.0 : -2.0);
      EXPECT_EQ(env.episode_stats()[1], env.held_key() == 2 ? 1.0 : 0.0);
    }
    EXPECT_GT(opened, 10);
  }
  std::vector<double> r3;
  bool by_door = true;
  play(env, 0, &r3, &by_door);
  int timeouts = 0;
  for (int i = 0; i < 20; ++i) {
    r3.clear();
    play(env, 0, &r3, &by_door);
    ASSERT_EQ(env.held_key(), 0);
    ++timeouts;
    EXPECT_FALSE(by_door);
    EXPECT_EQ(r3.back(), -5.0);
    for (std::size_t j = 0; j + 1 < r3.size(); ++j) EXPECT_EQ(r3[j], 0.0);
  }
  EXPECT_GT(timeouts, 0);
}

TEST(KeyToDoorTest, PickupFrameShowsKeyUnderAgent) {
  KeyToDoorEnv env(KeyToDoorConfig{}, 35);
  EnvStep s = env.reset();
  while (env.phase() == 1 && env.held_key() == 0) s = env.step(toward(env.agent(), env.key()));
  if (env.phase() != 1) GTEST_SKIP() << "key out of reach in this episode";
  EXPECT_EQ(s.event, "key;phase=1");
  const auto a = env.agent();
  const std::size_t base = static_cast<std::size_t>((a.first * 6 + a.second) * 5);
  EXPECT_EQ(s.observation[base + 0], 1.0f);
  EXPECT_EQ(s.observation[base + 1], 1.0f);
  s = env.step(0);
  EXPECT_EQ(s.observation[static_cast<std::size_t>((env.agent().first * 6 + env.agent().second) * 5 + 1)], 0.0f);
}

}  // namespace
}  // namespace sacredit::envs
