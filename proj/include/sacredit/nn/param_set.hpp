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

#ifndef SACREDIT_NN_PARAM_SET_HPP_
#define SACREDIT_NN_PARAM_SET_HPP_

#include <Eigen/Core>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/random.hpp"

namespace sacredit::nn {

template <typename T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

// Tensors are stored as 2-D matrices; vectors are 1 x n. The logical shape of
// a tensor is {rows, cols}.
template <typename T>
using Tensor = Mat<T>;

// Named, shape-frozen collection of tensors with a version counter that only
// moves forward.
template <typename T>
class ParamSet {
 public:
  std::size_t add(const std::string& name, Eigen::Index rows, Eigen::Index cols) {
    if (index_.count(name) != 0) throw ConfigError("duplicate parameter name: " + name);
    if (rows <= 0 || cols <= 0) throw ConfigError("parameter " + name + " has empty shape");
    index_.emplace(name, names_.size());
    names_.push_back(name);
    values_.push_back(Mat<T>::Zero(rows, cols));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  const std::string& name(std::size_t i) const { return names_[i]; }
  const Mat<T>& value(std::size_t i) const { return values_[i]; }
  const Mat<T>& value(const std::string& name) const { return values_[find(name)]; }

  std::size_t find(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }
  bool contains(const std::string& name) const { return index_.count(name) != 0; }

  std::uint64_t version() const { return version_; }

  // Replaces one tensor; the shape must match.
  void set(std::size_t i, const Mat<T>& v) {
    check_shape(i, v);
    values_[i] = v;
    ++version_;
  }

  // Mutates values in place (optimizer, initializers) and bumps the version.
  template <typename F>
  void update(F&& f) {
    for (std::size_t i = 0; i < values_.size(); ++i) f(i, values_[i]);
    ++version_;
  }

  // Restores a version stamp read from a checkpoint.
  void restore_version(std::uint64_t v) { version_ = v; }

  ParamSet zeros_like() const {
    ParamSet out;
    for (std::size_t i = 0; i < size(); ++i) out.add(names_[i], values_[i].rows(), values_[i].cols());
    return out;
  }

  bool same_layout(const ParamSet& other) const {
    if (other.size() != size()) return false;
    for (std::size_t i = 0; i < size(); ++i) {
      if (other.names_[i] != names_[i] || other.values_[i].rows() != values_[i].rows() ||
          other.values_[i].cols() != values_[i].cols()) {
        return false;
      }
    }
    return true;
  }

  void set_zero() {
    for (auto& v : values_) v.setZero();
  }

  bool all_finite() const {
    for (const auto& v : values_) {
      if (!v.allFinite()) return false;
    }
    return true;
  }

  double squared_norm() const {
    double s = 0.0;
    for (const auto& v : values_) s += static_cast<double>(v.squaredNorm());
    return s;
  }

  std::size_t scalar_count() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += static_cast<std::size_t>(v.size());
    return n;
  }

  template <typename U>
  ParamSet<U> cast() const {
    ParamSet<U> out;
    for (std::size_t i = 0; i < size(); ++i) {
      out.add(names_[i], values_[i].rows(), values_[i].cols());
      out.set(i, values_[i].template cast<U>());
    }
    out.restore_version(version_);
    return out;
  }

 private:
  void check_shape(std::size_t i, const Mat<T>& v) const {
    if (v.rows() != values_[i].rows() || v.cols() != values_[i].cols()) {
      throw ConfigError("shape mismatch for parameter " + names_[i]);
    }
  }

  std::vector<std::string> names_;
  std::vector<Mat<T>> values_;
  std::unordered_map<std::string, std::size_t> index_;
  std::uint64_t version_ = 0;
};

// Uniform fan-in initialisation: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
template <typename T>
void init_uniform_fan_in(Mat<T>& w, Eigen::Index fan_in, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      w(i, j) = static_cast<T>((2.0 * uniform01(rng) - 1.0) * bound);
    }
  }
}

}  // namespace sacredit::nn

#endif  // SACREDIT_NN_PARAM_SET_HPP_
