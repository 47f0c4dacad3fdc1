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

#ifndef SACREDIT_NN_LAYERS_HPP_
#define SACREDIT_NN_LAYERS_HPP_

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/graph.hpp"
#include "sacredit/nn/param_set.hpp"
#include "sacredit/random.hpp"

namespace sacredit::nn {

enum class Activation { kRelu, kIdentity, kSigmoid };

template <typename T>
Var activate(Graph<T>& g, Var x, Activation a) {
  switch (a) {
    case Activation::kRelu:
      return g.relu(x);
    case Activation::kSigmoid:
      return g.sigmoid(x);
    case Activation::kIdentity:
      break;
  }
  return x;
}

// widths = {input, hidden..., output}; one activation per weight layer.
struct MlpSpec {
  std::vector<int> widths;
  std::vector<Activation> activations;

  static MlpSpec make(std::vector<int> widths, Activation hidden, Activation last) {
    MlpSpec s;
    s.widths = std::move(widths);
    for (std::size_t i = 1; i < s.widths.size(); ++i) {
      s.activations.push_back(i + 1 == s.widths.size() ? last : hidden);
    }
    return s;
  }

  int input_width() const { return widths.front(); }
  int output_width() const { return widths.back(); }

  void validate() const {
    if (widths.size() < 2) throw ConfigError("MLP needs at least one layer");
    if (activations.size() != widths.size() - 1) throw ConfigError("MLP needs one activation per layer");
    for (int w : widths) {
      if (w <= 0) throw ConfigError("MLP widths must be positive");
    }
  }
};

template <typename T>
class Mlp {
 public:
  Mlp() = default;

  Mlp(MlpSpec spec, ParamSet<T>& params, const std::string& prefix) : spec_(std::move(spec)) {
    spec_.validate();
    for (std::size_t l = 0; l + 1 < spec_.widths.size(); ++l) {
      const std::string base = prefix + "/l" + std::to_string(l);
      weights_.push_back(params.add(base + "/w", spec_.widths[l], spec_.widths[l + 1]));
      biases_.push_back(params.add(base + "/b", 1, spec_.widths[l + 1]));
    }
  }

  const MlpSpec& spec() const { return spec_; }

  void initialize(ParamSet<T>& params, Rng& rng, bool zero_last_layer = false) const {
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      Mat<T> w = Mat<T>::Zero(spec_.widths[l], spec_.widths[l + 1]);
      if (!(zero_last_layer && l + 1 == weights_.size())) init_uniform_fan_in(w, spec_.widths[l], rng);
      params.set(weights_[l], w);
      params.set(biases_[l], Mat<T>::Zero(1, spec_.widths[l + 1]));
    }
  }

  Var forward(Graph<T>& g, const ParamSet<T>& params, Var x) const {
    if (g.value(x).cols() != spec_.input_width()) {
      throw ConfigError("MLP input width " + std::to_string(g.value(x).cols()) + " != " +
                        std::to_string(spec_.input_width()));
    }
    Var h = x;
    for (std::size_t l = 0; l < weights_.size(); ++l) {
      h = g.add_bias(g.matmul(h, g.param(params, weights_[l])), g.param(params, biases_[l]));
      h = activate(g, h, spec_.activations[l]);
    }
    return h;
  }

 private:
  MlpSpec spec_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
};

struct ConvLayerSpec {
  int out_channels = 1;
  int kernel = 1;
  int stride = 1;
  Activation activation = Activation::kRelu;
};

// Input is [height, width, channels]; output is the flattened last feature map.
struct ConvSpec {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<ConvLayerSpec> layers;

  std::vector<ConvGeometry> geometries() const {
    std::vector<ConvGeometry> out;
    int h = height, w = width, c = channels;
    for (const auto& l : layers) {
      ConvGeometry g{h, w, c, l.out_channels, l.kernel, l.stride};
      if (l.kernel <= 0 || l.stride <= 0 || l.out_channels <= 0) throw ConfigError("conv layer fields must be positive");
      if (l.kernel > h || l.kernel > w || g.out_height() <= 0 || g.out_width() <= 0) {
        throw ConfigError("conv kernel larger than its input");
      }
      out.push_back(g);
      h = g.out_height();
      w = g.out_width();
      c = g.out_channels;
    }
    return out;
  }

  int input_features() const { return height * width * channels; }
  int output_features() const {
    const auto g = geometries();
    return g.empty() ? input_features() : g.back().out_features();
  }

  void validate() const {
    if (height <= 0 || width <= 0 || channels <= 0) throw ConfigError("conv input shape must be positive");
    if (layers.empty()) throw ConfigError("conv net needs at least one layer");
    geometries();
  }
};

template <typename T>
class ConvNet {
 public:
  ConvNet() = default;

  ConvNet(ConvSpec spec, ParamSet<T>& params, const std::string& prefix) : spec_(std::move(spec)) {
    spec_.validate();
    geos_ = spec_.geometries();
    for (std::size_t l = 0; l < geos_.size(); ++l) {
      const std::string base = prefix + "/conv" + std::to_string(l);
      weights_.push_back(params.add(base + "/w", geos_[l].patch_size(), geos_[l].out_channels));
      biases_.push_back(params.add(base + "/b", 1, geos_[l].out_channels));
    }
  }

  const ConvSpec& spec() const { return spec_; }

  void initialize(ParamSet<T>& params, Rng& rng) const {
    for (std::size_t l = 0; l < geos_.size(); ++l) {
      Mat<T> w(geos_[l].patch_size(), geos_[l].out_channels);
      init_uniform_fan_in(w, geos_[l].patch_size(), rng);
      params.set(weights_[l], w);
      params.set(biases_[l], Mat<T>::Zero(1, geos_[l].out_channels));
    }
  }

  Var forward(Graph<T>& g, const ParamSet<T>& params, Var x) const {
    Var h = x;
    for (std::size_t l = 0; l < geos_.size(); ++l) {
      h = g.conv2d(h, g.param(params, weights_[l]), g.param(params, biases_[l]), geos_[l]);
      h = activate(g, h, spec_.layers[l].activation);
    }
    return h;
  }

 private:
  ConvSpec spec_;
  std::vector<ConvGeometry> geos_;
  std::vector<std::size_t> weights_;
  std::vector<std::size_t> biases_;
};

// Recurrent state for a batch of sequences: both matrices are [batch, width].
template <typename T>
struct LstmState {
  Mat<T> hidden;
  Mat<T> cell;

  static LstmState zeros(Eigen::Index batch, Eigen::Index width) {
    return {Mat<T>::Zero(batch, width), Mat<T>::Zero(batch, width)};
  }
  Eigen::Index width() const { return hidden.cols(); }
};

// Standard LSTM cell, gate order (input, forget, candidate, output).
template <typename T>
class Lstm {
 public:
  Lstm() = default;

  Lstm(int input_width, int width, ParamSet<T>& params, const std::string& prefix)
      : input_width_(input_width), width_(width) {
    if (input_width <= 0 || width <= 0) throw ConfigError("LSTM widths must be positive");
    wx_ = params.add(prefix + "/wx", input_width, 4 * width);
    wh_ = params.add(prefix + "/wh", width, 4 * width);
    b_ = params.add(prefix + "/b", 1, 4 * width);
  }

  int input_width() const { return input_width_; }
  int width() const { return width_; }

  void initialize(ParamSet<T>& params, Rng& rng) const {
    Mat<T> wx(input_width_, 4 * width_);
    Mat<T> wh(width_, 4 * width_);
    init_uniform_fan_in(wx, input_width_ + width_, rng);
    init_uniform_fan_in(wh, input_width_ + width_, rng);
    params.set(wx_, wx);
    params.set(wh_, wh);
    params.set(b_, Mat<T>::Zero(1, 4 * width_));
  }

  // One step; returns (hidden, cell).
  std::pair<Var, Var> step(Graph<T>& g, const ParamSet<T>& params, Var x, Var hidden, Var cell) const {
    if (g.value(x).cols() != input_width_) throw ConfigError("LSTM input width mismatch");
    if (g.value(hidden).cols() != width_ || g.value(cell).cols() != width_) {
      throw ConfigError("LSTM state width mismatch");
    }
    Var z = g.add(g.matmul(x, g.param(params, wx_)), g.matmul(hidden, g.param(params, wh_)));
    z = g.add_bias(z, g.param(params, b_));
    Var i = g.sigmoid(g.slice_cols(z, 0, width_));
    Var f = g.sigmoid(g.slice_cols(z, width_, width_));
    Var c_hat = g.tanh(g.slice_cols(z, 2 * width_, width_));
    Var o = g.sigmoid(g.slice_cols(z, 3 * width_, width_));
    Var c = g.add(g.mul(f, cell), g.mul(i, c_hat));
    Var h = g.mul(o, g.tanh(c));
    return {h, c};
  }

 private:
  int input_width_ = 0;
  int width_ = 0;
  std::size_t wx_ = 0, wh_ = 0, b_ = 0;
};

}  // namespace sacredit::nn

#endif  // SACREDIT_NN_LAYERS_HPP_
