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

// Central finite-difference oracle shared by the test binaries. It only uses
// forward evaluations, never the tape's backward pass.

#ifndef SACREDIT_TESTS_GRAD_CHECK_HPP_
#define SACREDIT_TESTS_GRAD_CHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>

#include "sacredit/nn/graph.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::testing {

using nn::Graph;
using nn::Mat;
using nn::ParamSet;
using nn::Var;

// Builds a scalar loss on a fresh graph from `params`.
using LossBuilder = std::function<Var(Graph<double>&, const ParamSet<double>&)>;

inline double rel_error(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

// Max relative error between the tape's gradient and central differences over
// every parameter entry.
// Tape gradient of `build` against central differences of `numeric`. Losses
// with stop-gradients need a separate numeric surrogate in which the stopped
// quantities are frozen at the base parameters.
inline double max_grad_rel_error(ParamSet<double>& params, const LossBuilder& build, const LossBuilder& numeric,
                                 double step = 1e-5) {
  ParamSet<double> analytic = params.zeros_like();
  {
    Graph<double> g;
    Var loss = build(g, params);
    g.backward(loss);
    g.accumulate_param_grads(params, analytic);
  }
  auto eval = [&]() {
    Graph<double> g(false);
    return g.scalar(numeric(g, params));
  };
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    Mat<double> base = params.value(i);
    for (Eigen::Index k = 0; k < base.size(); ++k) {
      Mat<double> probe = base;
      probe(k) = base(k) + step;
      params.set(i, probe);
      const double up = eval();
      probe(k) = base(k) - step;
      params.set(i, probe);
      const double down = eval();
      params.set(i, base);
      const double numeric = (up - down) / (2.0 * step);
      worst = std::max(worst, rel_error(analytic.value(i)(k), numeric));
    }
  }
  return worst;
}

inline double max_grad_rel_error(ParamSet<double>& params, const LossBuilder& build, double step = 1e-5) {
  return max_grad_rel_error(params, build, build, step);
}

inline Mat<double> random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng, double scale = 1.0) {
  Mat<double> m(rows, cols);
  for (Eigen::Index k = 0; k < m.size(); ++k) m(k) = scale * (2.0 * uniform01(rng) - 1.0);
  return m;
}

inline void randomize(ParamSet<double>& params, Rng& rng, double scale = 0.5) {
  params.update([&](std::size_t, Mat<double>& v) { v = random_matrix(v.rows(), v.cols(), rng, scale); });
}

}  // namespace sacredit::testing

#endif  // SACREDIT_TESTS_GRAD_CHECK_HPP_
