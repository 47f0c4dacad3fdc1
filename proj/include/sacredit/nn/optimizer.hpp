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

#ifndef SACREDIT_NN_OPTIMIZER_HPP_
#define SACREDIT_NN_OPTIMIZER_HPP_

#include <cmath>
#include <cstdint>
#include <string>

#include "sacredit/errors.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::nn {

enum class OptimizerKind { kRmsProp, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kRmsProp;
  double learning_rate = 4e-4;
  double epsilon = 1e-4;
  double decay = 0.99;     // rmsprop second-moment decay
  double momentum = 0.0;   // rmsprop
  double beta1 = 0.9;      // adam
  double beta2 = 0.999;    // adam
  double clip_norm = 40.0; // global gradient norm bound; <= 0 disables

  void validate() const {
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be positive");
    if (!(epsilon > 0.0)) throw ConfigError("optimizer epsilon must be positive");
    auto in_unit = [](double x) { return x >= 0.0 && x < 1.0; };
    if (!in_unit(decay) || !in_unit(momentum)) throw ConfigError("rmsprop decay/momentum must lie in [0, 1)");
    if (!in_unit(beta1) || !in_unit(beta2)) throw ConfigError("adam betas must lie in [0, 1)");
  }
};

// Scales `grads` in place so that their global L2 norm is at most `bound`.
// Returns the norm before clipping.
template <typename T>
double clip_global_norm(ParamSet<T>& grads, double bound) {
  const double norm = std::sqrt(grads.squared_norm());
  if (bound > 0.0 && norm > bound) {
    const T s = static_cast<T>(bound / norm);
    grads.update([s](std::size_t, Mat<T>& g) { g *= s; });
  }
  return norm;
}

// clip_global_norm restricted to the entries whose names start with `prefix`.
template <typename T>
double clip_group_norm(ParamSet<T>& grads, double bound, const std::string& prefix) {
  double sq = 0.0;
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (grads.name(i).rfind(prefix, 0) == 0) sq += grads.value(i).template cast<double>().squaredNorm();
  }
  const double norm = std::sqrt(sq);
  if (bound > 0.0 && norm > bound) {
    const T s = static_cast<T>(bound / norm);
    grads.update([&](std::size_t i, Mat<T>& g) {
      if (grads.name(i).rfind(prefix, 0) == 0) g *= s;
    });
  }
  return norm;
}

// RMSprop (epsilon inside the square root, optional momentum) and Adam (bias
// corrected, epsilon outside the square root).
template <typename T>
class Optimizer {
 public:
  Optimizer() = default;

  Optimizer(const OptimizerConfig& cfg, const ParamSet<T>& params) : cfg_(cfg) {
    cfg_.validate();
    first_ = params.zeros_like();
    second_ = params.zeros_like();
  }

  const OptimizerConfig& config() const { return cfg_; }
  std::int64_t steps() const { return steps_; }
  const ParamSet<T>& first_moment() const { return first_; }
  const ParamSet<T>& second_moment() const { return second_; }

  // Restores accumulators read from a checkpoint.
  void restore(ParamSet<T> first, ParamSet<T> second, std::int64_t steps) {
    if (!first.same_layout(first_) || !second.same_layout(second_)) {
      throw FormatError("optimizer state layout does not match parameters");
    }
    first_ = std::move(first);
    second_ = std::move(second);
    steps_ = steps;
  }

  // Applies one update. Non-finite gradients are rejected before anything is
  // modified.
  void step(ParamSet<T>& params, const ParamSet<T>& grads) {
    if (!params.same_layout(grads) || !params.same_layout(first_)) {
      throw ConfigError("gradient layout does not match parameters");
    }
    if (!grads.all_finite()) throw NumericError("non-finite gradient; optimizer step rejected");
    ++steps_;
    const T lr = static_cast<T>(cfg_.learning_rate);
    const T eps = static_cast<T>(cfg_.epsilon);
    if (cfg_.kind == OptimizerKind::kRmsProp) {
      const T decay = static_cast<T>(cfg_.decay);
      const T momentum = static_cast<T>(cfg_.momentum);
      second_.update([&](std::size_t i, Mat<T>& ms) {
        ms = decay * ms + (T(1) - decay) * grads.value(i).cwiseAbs2();
      });
      first_.update([&](std::size_t i, Mat<T>& mom) {
        mom = momentum * mom +
              (lr * grads.value(i).array() / (second_.value(i).array() + eps).sqrt()).matrix();
      });
      params.update([&](std::size_t i, Mat<T>& p) { p -= first_.value(i); });
    } else {
      const double b1 = cfg_.beta1;
      const double b2 = cfg_.beta2;
      const T c1 = static_cast<T>(1.0 - std::pow(b1, static_cast<double>(steps_)));
      const T c2 = static_cast<T>(1.0 - std::pow(b2, static_cast<double>(steps_)));
      first_.update([&](std::size_t i, Mat<T>& m) {
        m = static_cast<T>(b1) * m + static_cast<T>(1.0 - b1) * grads.value(i);
      });
      second_.update([&](std::size_t i, Mat<T>& v) {
        v = static_cast<T>(b2) * v + static_cast<T>(1.0 - b2) * grads.value(i).cwiseAbs2();
      });
      params.update([&](std::size_t i, Mat<T>& p) {
        const auto m_hat = first_.value(i).array() / c1;
        const auto v_hat = second_.value(i).array() / c2;
        p.array() -= lr * m_hat / (v_hat.sqrt() + eps);
      });
    }
  }

 private:
  OptimizerConfig cfg_;
  ParamSet<T> first_;
  ParamSet<T> second_;
  std::int64_t steps_ = 0;
};

inline std::string to_string(OptimizerKind k) { return k == OptimizerKind::kAdam ? "adam" : "rmsprop"; }

inline OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "rmsprop") return OptimizerKind::kRmsProp;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer: " + s);
}

}  // namespace sacredit::nn

#endif  // SACREDIT_NN_OPTIMIZER_HPP_
