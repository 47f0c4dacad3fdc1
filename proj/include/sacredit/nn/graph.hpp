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

#ifndef SACREDIT_NN_GRAPH_HPP_
#define SACREDIT_NN_GRAPH_HPP_

#include <Eigen/Core>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::nn {

// Handle to a node of a Graph. Only meaningful for the graph that issued it.
struct Var {
  std::int32_t id = -1;
  bool valid() const { return id >= 0; }
};

// Spatial geometry of one convolution layer. Inputs and outputs are laid out
// row-per-sample in height-width-channel order.
struct ConvGeometry {
  int height = 0;
  int width = 0;
  int in_channels = 0;
  int out_channels = 0;
  int kernel = 1;
  int stride = 1;

  int out_height() const { return (height - kernel) / stride + 1; }
  int out_width() const { return (width - kernel) / stride + 1; }
  int in_features() const { return height * width * in_channels; }
  int out_features() const { return out_height() * out_width() * out_channels; }
  int patch_size() const { return kernel * kernel * in_channels; }
};

// Tape-based reverse-mode automatic differentiation over 2-D matrices.
//
// Every operation appends a node holding its forward value. When recording is
// on and an input requires a gradient, the node also stores a closure that
// propagates the upstream gradient into its inputs. Parameter leaves reference
// the ParamSet storage directly and are deduplicated per graph, so a parameter
// used at several time steps accumulates its gradient in one leaf.
template <typename T>
class Graph {
 public:
  using Matrix = Mat<T>;
  using Backward = std::function<void(const Matrix& upstream)>;

  explicit Graph(bool record = true) : record_(record) { nodes_.reserve(256); }

  Graph(const Graph&) = delete;
  Graph& operator=(const Graph&) = delete;

  bool recording() const { return record_; }
  std::size_t size() const { return nodes_.size(); }

  // ---- leaves ----------------------------------------------------------

  Var constant(Matrix v) { return push(std::move(v), false, nullptr); }

  Var constant_scalar(T v) { return constant(Matrix::Constant(1, 1, v)); }

  Var param(const ParamSet<T>& ps, std::size_t i) {
    const auto key = std::make_pair(static_cast<const void*>(&ps), i);
    auto it = leaf_cache_.find(key);
    if (it != leaf_cache_.end()) return Var{it->second};
    Node n;
    n.ref = &ps.value(i);
    n.needs_grad = record_;
    n.owner = &ps;
    n.param_index = i;
    nodes_.push_back(std::move(n));
    const Var v{static_cast<std::int32_t>(nodes_.size() - 1)};
    leaf_cache_.emplace(key, v.id);
    return v;
  }

  Var param(const ParamSet<T>& ps, const std::string& name) { return param(ps, ps.find(name)); }

  // ---- access ----------------------------------------------------------

  const Matrix& value(Var v) const {
    const Node& n = node(v);
    return n.ref != nullptr ? *n.ref : n.own;
  }

  T scalar(Var v) const {
    const Matrix& m = value(v);
    if (m.rows() != 1 || m.cols() != 1) throw ConfigError("scalar() on non-scalar node");
    return m(0, 0);
  }

  bool requires_grad(Var v) const { return node(v).needs_grad; }

  // Gradient accumulated at `v` by the last backward pass, or nullptr.
  const Matrix* grad(Var v) const {
    const Node& n = node(v);
    return n.grad.size() == 0 ? nullptr : &n.grad;
  }

  // Runs reverse accumulation from a 1x1 node.
  void backward(Var loss) {
    if (!record_) throw UsageError("backward() on a graph built without recording");
    const Matrix& lv = value(loss);
    if (lv.rows() != 1 || lv.cols() != 1) throw ConfigError("backward() requires a scalar loss");
    for (auto& n : nodes_) n.grad.resize(0, 0);
    nodes_[loss.id].grad = Matrix::Ones(1, 1);
    for (std::int32_t id = loss.id; id >= 0; --id) {
      Node& n = nodes_[id];
      if (!n.needs_grad || !n.back || n.grad.size() == 0) continue;
      n.back(n.grad);
    }
  }

  // Adds the gradient of every leaf bound to `ps` into the matching tensor of
  // `grads` (which must share the layout of `ps`).
  void accumulate_param_grads(const ParamSet<T>& ps, ParamSet<T>& grads) const {
    if (!ps.same_layout(grads)) throw ConfigError("gradient set layout differs from parameters");
    grads.update([&](std::size_t i, Matrix& g) {
      auto it = leaf_cache_.find(std::make_pair(static_cast<const void*>(&ps), i));
      if (it == leaf_cache_.end()) return;
      const Node& n = nodes_[it->second];
      if (n.grad.size() != 0) g += n.grad;
    });
  }

  // Adds `g` to the gradient slot of `v`. Intended for custom operations.
  void add_grad(Var v, const Matrix& g) {
    Node& n = nodes_[v.id];
    if (!n.needs_grad) return;
    Matrix& dst = grad_slot(n);
    dst += g;
  }

  // Registers an operation whose forward value was computed by the caller.
  Var custom(Matrix value, const std::vector<Var>& inputs, Backward back) {
    return push(std::move(value), any_needs_grad(inputs), std::move(back));
  }

  // ---- operations --------------------------------------------------------

  Var stop_gradient(Var a) { return push(value(a), false, nullptr); }

  Var matmul(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.cols() != B.rows()) throw ConfigError(shape_msg("matmul", A, B));
    Matrix out = A * B;
    return push(std::move(out), any_needs_grad({a, b}), [this, a, b](const Matrix& G) {
      if (needs(a)) add_grad(a, G * value(b).transpose());
      if (needs(b)) add_grad(b, value(a).transpose() * G);
    });
  }

  // Adds a 1 x n row to every row of `a`.
  Var add_bias(Var a, Var bias) {
    const Matrix& A = value(a);
    const Matrix& B = value(bias);
    if (B.rows() != 1 || B.cols() != A.cols()) throw ConfigError(shape_msg("add_bias", A, B));
    Matrix out = A.rowwise() + B.row(0);
    return push(std::move(out), any_needs_grad({a, bias}), [this, a, bias](const Matrix& G) {
      if (needs(a)) add_grad(a, G);
      if (needs(bias)) add_grad(bias, G.colwise().sum());
    });
  }

  Var add(Var a, Var b) {
    check_same("add", a, b);
    Matrix out = value(a) + value(b);
    return push(std::move(out), any_needs_grad({a, b}), [this, a, b](const Matrix& G) {
      if (needs(a)) add_grad(a, G);
      if (needs(b)) add_grad(b, G);
    });
  }

  Var sub(Var a, Var b) {
    check_same("sub", a, b);
    Matrix out = value(a) - value(b);
    return push(std::move(out), any_needs_grad({a, b}), [this, a, b](const Matrix& G) {
      if (needs(a)) add_grad(a, G);
      if (needs(b)) add_grad(b, -G);
    });
  }

  Var mul(Var a, Var b) {
    check_same("mul", a, b);
    Matrix out = value(a).cwiseProduct(value(b));
    return push(std::move(out), any_needs_grad({a, b}), [this, a, b](const Matrix& G) {
      if (needs(a)) add_grad(a, G.cwiseProduct(value(b)));
      if (needs(b)) add_grad(b, G.cwiseProduct(value(a)));
    });
  }

  // Elementwise product with a constant matrix of the same shape.
  Var mul_const(Var a, const Matrix& m) {
    const Matrix& A = value(a);
    if (A.rows() != m.rows() || A.cols() != m.cols()) throw ConfigError(shape_msg("mul_const", A, m));
    Matrix out = A.cwiseProduct(m);
    return push(std::move(out), any_needs_grad({a}),
                [this, a, m](const Matrix& G) { add_grad(a, G.cwiseProduct(m)); });
  }

  Var scale(Var a, T s) {
    Matrix out = value(a) * s;
    return push(std::move(out), any_needs_grad({a}), [this, a, s](const Matrix& G) { add_grad(a, G * s); });
  }

  Var add_scalar(Var a, T s) {
    Matrix out = value(a).array() + s;
    return push(std::move(out), any_needs_grad({a}), [this, a](const Matrix& G) { add_grad(a, G); });
  }

  Var relu(Var a) {
    Matrix out = value(a).cwiseMax(T(0));
    return push(std::move(out), any_needs_grad({a}), [this, a](const Matrix& G) {
      add_grad(a, G.array() * (value(a).array() > T(0)).template cast<T>());
    });
  }

  Var sigmoid(Var a) {
    Matrix out = value(a).unaryExpr([](T x) { return sigmoid_scalar(x); });
    const std::int32_t id = next_id();
    return push(std::move(out), any_needs_grad({a}), [this, a, id](const Matrix& G) {
      const Matrix& y = nodes_[id].own;
      add_grad(a, G.array() * y.array() * (T(1) - y.array()));
    });
  }

  Var tanh(Var a) {
    Matrix out = value(a).array().tanh();
    const std::int32_t id = next_id();
    return push(std::move(out), any_needs_grad({a}), [this, a, id](const Matrix& G) {
      const Matrix& y = nodes_[id].own;
      add_grad(a, G.array() * (T(1) - y.array().square()));
    });
  }

  Var exp(Var a) {
    Matrix out = value(a).array().exp();
    const std::int32_t id = next_id();
    return push(std::move(out), any_needs_grad({a}), [this, a, id](const Matrix& G) {
      add_grad(a, G.cwiseProduct(nodes_[id].own));
    });
  }

  Var square(Var a) {
    Matrix out = value(a).array().square();
    return push(std::move(out), any_needs_grad({a}),
                [this, a](const Matrix& G) { add_grad(a, T(2) * G.cwiseProduct(value(a))); });
  }

  // Row-wise log-softmax.
  Var log_softmax(Var a) {
    const Matrix& A = value(a);
    Matrix out(A.rows(), A.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      const T m = A.row(i).maxCoeff();
      const T lse = m + std::log((A.row(i).array() - m).exp().sum());
      out.row(i) = A.row(i).array() - lse;
    }
    const std::int32_t id = next_id();
    return push(std::move(out), any_needs_grad({a}), [this, a, id](const Matrix& G) {
      const Matrix p = nodes_[id].own.array().exp();
      const Matrix row_sum = G.rowwise().sum();
      Matrix d = G - (p.array().colwise() * row_sum.col(0).array()).matrix();
      add_grad(a, d);
    });
  }

  // Row-wise softmax.
  Var softmax(Var a) { return exp(log_softmax(a)); }

  // Sum of all entries (1x1).
  Var sum(Var a) {
    Matrix out = Matrix::Constant(1, 1, value(a).sum());
    return push(std::move(out), any_needs_grad({a}), [this, a](const Matrix& G) {
      const Matrix& A = value(a);
      add_grad(a, Matrix::Constant(A.rows(), A.cols(), G(0, 0)));
    });
  }

  Var mean(Var a) { return scale(sum(a), T(1) / static_cast<T>(value(a).size())); }

  // Per-row sums (n x 1).
  Var row_sum(Var a) {
    Matrix out = value(a).rowwise().sum();
    return push(std::move(out), any_needs_grad({a}), [this, a](const Matrix& G) {
      add_grad(a, G.replicate(1, value(a).cols()));
    });
  }

  // out(i) = a(i, index[i]).
  Var pick(Var a, const std::vector<int>& index) {
    const Matrix& A = value(a);
    if (static_cast<Eigen::Index>(index.size()) != A.rows()) throw ConfigError("pick(): index count != rows");
    Matrix out(A.rows(), 1);
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
      if (index[i] < 0 || index[i] >= A.cols()) throw ConfigError("pick(): index out of range");
      out(i, 0) = A(i, index[i]);
    }
    return push(std::move(out), any_needs_grad({a}), [this, a, index](const Matrix& G) {
      const Matrix& A = value(a);
      Matrix d = Matrix::Zero(A.rows(), A.cols());
      for (Eigen::Index i = 0; i < A.rows(); ++i) d(i, index[i]) = G(i, 0);
      add_grad(a, d);
    });
  }

  Var slice_cols(Var a, Eigen::Index start, Eigen::Index count) {
    const Matrix& A = value(a);
    if (start < 0 || count <= 0 || start + count > A.cols()) throw ConfigError("slice_cols() out of range");
    Matrix out = A.middleCols(start, count);
    return push(std::move(out), any_needs_grad({a}), [this, a, start](const Matrix& G) {
      const Matrix& A = value(a);
      Matrix d = Matrix::Zero(A.rows(), A.cols());
      d.middleCols(start, G.cols()) = G;
      add_grad(a, d);
    });
  }

  Var slice_rows(Var a, Eigen::Index start, Eigen::Index count) {
    const Matrix& A = value(a);
    if (start < 0 || count <= 0 || start + count > A.rows()) throw ConfigError("slice_rows() out of range");
    Matrix out = A.middleRows(start, count);
    return push(std::move(out), any_needs_grad({a}), [this, a, start](const Matrix& G) {
      Node& n = nodes_[a.id];
      Matrix& dst = grad_slot(n);
      dst.middleRows(start, G.rows()) += G;
    });
  }

  Var concat_rows(const std::vector<Var>& parts) {
    if (parts.empty()) throw ConfigError("concat_rows() of nothing");
    Eigen::Index rows = 0;
    const Eigen::Index cols = value(parts[0]).cols();
    for (Var p : parts) {
      if (value(p).cols() != cols) throw ConfigError("concat_rows(): column mismatch");
      rows += value(p).rows();
    }
    Matrix out(rows, cols);
    Eigen::Index r = 0;
    for (Var p : parts) {
      out.middleRows(r, value(p).rows()) = value(p);
      r += value(p).rows();
    }
    return push(std::move(out), any_needs_grad(parts), [this, parts](const Matrix& G) {
      Eigen::Index r = 0;
      for (Var p : parts) {
        const Eigen::Index n = value(p).rows();
        if (needs(p)) add_grad(p, G.middleRows(r, n));
        r += n;
      }
    });
  }

  Var concat_cols(Var a, Var b) {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows()) throw ConfigError(shape_msg("concat_cols", A, B));
    Matrix out(A.rows(), A.cols() + B.cols());
    out << A, B;
    return push(std::move(out), any_needs_grad({a, b}), [this, a, b](const Matrix& G) {
      const Eigen::Index ca = value(a).cols();
      if (needs(a)) add_grad(a, G.leftCols(ca));
      if (needs(b)) add_grad(b, G.rightCols(G.cols() - ca));
    });
  }

  // out(i, :) = a(rows[i], :); rows may repeat.
  Var gather_rows(Var a, const std::vector<int>& rows) {
    const Matrix& A = value(a);
    Matrix out(static_cast<Eigen::Index>(rows.size()), A.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i] < 0 || rows[i] >= A.rows()) throw ConfigError("gather_rows(): row out of range");
      out.row(static_cast<Eigen::Index>(i)) = A.row(rows[i]);
    }
    return push(std::move(out), any_needs_grad({a}), [this, a, rows](const Matrix& G) {
      Matrix d = Matrix::Zero(value(a).rows(), value(a).cols());
      for (std::size_t i = 0; i < rows.size(); ++i) d.row(rows[i]) += G.row(static_cast<Eigen::Index>(i));
      add_grad(a, d);
    });
  }

  // For an n x 1 column `a`, out(i) = sum of a(j) for j in [ranges[i].first,
  // ranges[i].second). Empty ranges yield 0.
  Var range_sum(Var a, const std::vector<std::pair<int, int>>& ranges) {
    const Matrix& A = value(a);
    if (A.cols() != 1) throw ConfigError("range_sum() expects a column");
    const Eigen::Index n = A.rows();
    Matrix out(static_cast<Eigen::Index>(ranges.size()), 1);
    for (std::size_t i = 0; i < ranges.size(); ++i) {
      const auto [lo, hi] = ranges[i];
      if (lo < 0 || hi < lo || hi > n) throw ConfigError("range_sum(): bad range");
      T s = T(0);
      for (int j = lo; j < hi; ++j) s += A(j, 0);
      out(static_cast<Eigen::Index>(i), 0) = s;
    }
    return push(std::move(out), any_needs_grad({a}), [this, a, ranges, n](const Matrix& G) {
      std::vector<T> diff(static_cast<std::size_t>(n) + 1, T(0));
      for (std::size_t i = 0; i < ranges.size(); ++i) {
        diff[ranges[i].first] += G(static_cast<Eigen::Index>(i), 0);
        diff[ranges[i].second] -= G(static_cast<Eigen::Index>(i), 0);
      }
      Matrix d(n, 1);
      T run = T(0);
      for (Eigen::Index j = 0; j < n; ++j) {
        run += diff[j];
        d(j, 0) = run;
      }
      add_grad(a, d);
    });
  }

  // 2-D convolution, valid padding. x: [batch, H*W*Cin], w: [k*k*Cin, Cout],
  // bias: [1, Cout]; output [batch, OH*OW*Cout].
  Var conv2d(Var x, Var w, Var bias, const ConvGeometry& geo) {
    const Matrix& X = value(x);
    const Matrix& W = value(w);
    const Matrix& B = value(bias);
    if (geo.out_height() <= 0 || geo.out_width() <= 0 || geo.kernel > geo.height || geo.kernel > geo.width) {
      throw ConfigError("conv2d(): kernel larger than input");
    }
    if (X.cols() != geo.in_features()) throw ConfigError("conv2d(): input width mismatch");
    if (W.rows() != geo.patch_size() || W.cols() != geo.out_channels) throw ConfigError("conv2d(): weight shape");
    if (B.rows() != 1 || B.cols() != geo.out_channels) throw ConfigError("conv2d(): bias shape");
    const Eigen::Index batch = X.rows();
    const int positions = geo.out_height() * geo.out_width();
    auto patches = std::make_shared<Matrix>(batch * positions, geo.patch_size());
    for (Eigen::Index s = 0; s < batch; ++s) {
      for (int oy = 0; oy < geo.out_height(); ++oy) {
        for (int ox = 0; ox < geo.out_width(); ++ox) {
          const Eigen::Index row = s * positions + oy * geo.out_width() + ox;
          for (int ky = 0; ky < geo.kernel; ++ky) {
            for (int kx = 0; kx < geo.kernel; ++kx) {
              const int iy = oy * geo.stride + ky;
              const int ix = ox * geo.stride + kx;
              for (int c = 0; c < geo.in_channels; ++c) {
                (*patches)(row, (ky * geo.kernel + kx) * geo.in_channels + c) =
                    X(s, (iy * geo.width + ix) * geo.in_channels + c);
              }
            }
          }
        }
      }
    }
    Matrix y = (*patches) * W;
    y.rowwise() += B.row(0);
    Matrix out(batch, static_cast<Eigen::Index>(positions) * geo.out_channels);
    for (Eigen::Index s = 0; s < batch; ++s) {
      for (int p = 0; p < positions; ++p) {
        out.row(s).segment(static_cast<Eigen::Index>(p) * geo.out_channels, geo.out_channels) =
            y.row(s * positions + p);
      }
    }
    return push(std::move(out), any_needs_grad({x, w, bias}),
                [this, x, w, bias, geo, patches, batch, positions](const Matrix& G) {
                  Matrix gy(batch * positions, geo.out_channels);
                  for (Eigen::Index s = 0; s < batch; ++s) {
                    for (int p = 0; p < positions; ++p) {
                      gy.row(s * positions + p) =
                          G.row(s).segment(static_cast<Eigen::Index>(p) * geo.out_channels, geo.out_channels);
                    }
                  }
                  if (needs(w)) add_grad(w, patches->transpose() * gy);
                  if (needs(bias)) add_grad(bias, gy.colwise().sum());
                  if (needs(x)) {
                    const Matrix gp = gy * value(w).transpose();
                    Matrix gx = Matrix::Zero(batch, geo.in_features());
                    for (Eigen::Index s = 0; s < batch; ++s) {
                      for (int oy = 0; oy < geo.out_height(); ++oy) {
                        for (int ox = 0; ox < geo.out_width(); ++ox) {
                          const Eigen::Index row = s * positions + oy * geo.out_width() + ox;
                          for (int ky = 0; ky < geo.kernel; ++ky) {
                            for (int kx = 0; kx < geo.kernel; ++kx) {
                              const int iy = oy * geo.stride + ky;
                              const int ix = ox * geo.stride + kx;
                              for (int c = 0; c < geo.in_channels; ++c) {
                                gx(s, (iy * geo.width + ix) * geo.in_channels + c) +=
                                    gp(row, (ky * geo.kernel + kx) * geo.in_channels + c);
                              }
                            }
                          }
                        }
                      }
                    }
                    add_grad(x, gx);
                  }
                });
  }

  static T sigmoid_scalar(T x) {
    if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
    const T e = std::exp(x);
    return e / (T(1) + e);
  }

 private:
  struct Node {
    Matrix own;
    const Matrix* ref = nullptr;
    Matrix grad;
    bool needs_grad = false;
    Backward back;
    const ParamSet<T>* owner = nullptr;
    std::size_t param_index = 0;
  };

  const Node& node(Var v) const {
    if (v.id < 0 || static_cast<std::size_t>(v.id) >= nodes_.size()) throw UsageError("invalid graph variable");
    return nodes_[v.id];
  }

  bool needs(Var v) const { return nodes_[v.id].needs_grad; }

  bool any_needs_grad(std::initializer_list<Var> vs) const {
    if (!record_) return false;
    for (Var v : vs) {
      if (nodes_[node_index(v)].needs_grad) return true;
    }
    return false;
  }

  bool any_needs_grad(const std::vector<Var>& vs) const {
    if (!record_) return false;
    for (Var v : vs) {
      if (nodes_[node_index(v)].needs_grad) return true;
    }
    return false;
  }

  std::size_t node_index(Var v) const {
    node(v);
    return static_cast<std::size_t>(v.id);
  }

  std::int32_t next_id() const { return static_cast<std::int32_t>(nodes_.size()); }

  Var push(Matrix value, bool needs_grad, Backward back) {
    Node n;
    n.own = std::move(value);
    n.needs_grad = needs_grad;
    if (needs_grad) n.back = std::move(back);
    nodes_.push_back(std::move(n));
    return Var{static_cast<std::int32_t>(nodes_.size() - 1)};
  }

  Matrix& grad_slot(Node& n) {
    if (n.grad.size() == 0) {
      const Matrix& v = n.ref != nullptr ? *n.ref : n.own;
      n.grad = Matrix::Zero(v.rows(), v.cols());
    }
    return n.grad;
  }

  void check_same(const char* op, Var a, Var b) const {
    const Matrix& A = value(a);
    const Matrix& B = value(b);
    if (A.rows() != B.rows() || A.cols() != B.cols()) throw ConfigError(shape_msg(op, A, B));
  }

  static std::string shape_msg(const char* op, const Matrix& a, const Matrix& b) {
    return std::string(op) + "(): shape mismatch [" + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
           "] vs [" + std::to_string(b.rows()) + "x" + std::to_string(b.cols()) + "]";
  }

  bool record_;
  std::vector<Node> nodes_;
  std::map<std::pair<const void*, std::size_t>, std::int32_t> leaf_cache_;
};

}  // namespace sacredit::nn

#endif  // SACREDIT_NN_GRAPH_HPP_
