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


#ifndef SACREDIT_RUNTIME_BLOB_HPP_
#define SACREDIT_RUNTIME_BLOB_HPP_

#include <cstdint>
#include <cstring>
#include <string>
#include <type_traits>
#include <vector>

#include "sacredit/errors.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::runtime {

// Byte-exact serialization of runtime state into checkpoint blobs. Host byte
// order; blobs are only read back by the same build.
class BlobWriter {
 public:
  template <typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>
  void put(U v) {
    const auto* p = reinterpret_cast<const char*>(&v);
    data_.append(p, sizeof(U));
  }
  void put(const std::string& s) {
    put<std::uint64_t>(s.size());
    data_ += s;
  }
  template <typename U>
  void put(const std::vector<U>& v) {
    put<std::uint64_t>(v.size());
    for (const auto& x : v) put(x);
  }
  void put(const nn::Mat<float>& m) {
    put<std::int64_t>(m.rows());
    put<std::int64_t>(m.cols());
    data_.append(reinterpret_cast<const char*>(m.data()), sizeof(float) * static_cast<std::size_t>(m.size()));
  }
  const std::string& str() const { return data_; }

 private:
  std::string data_;
};

class BlobReader {
 public:
  explicit BlobReader(const std::string& data) : data_(data) {}

  template <typename U, typename = std::enable_if_t<std::is_arithmetic_v<U>>>
  U get() {
    need(sizeof(U));
    U v;
    std::memcpy(&v, data_.data() + pos_, sizeof(U));
    pos_ += sizeof(U);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  template <typename U>
  std::vector<U> get_vector() {
    std::vector<U> v(get<std::uint64_t>());
    for (auto& x : v) x = get<U>();
    return v;
  }
  std::vector<std::string> get_strings() {
    std::vector<std::string> v(get<std::uint64_t>());
    for (auto& x : v) x = get_string();
    return v;
  }
  nn::Mat<float> get_mat() {
    const auto rows = get<std::int64_t>();
    const auto cols = get<std::int64_t>();
    if (rows < 0 || cols < 0) throw FormatError("corrupt state blob");
    nn::Mat<float> m(rows, cols);
    const std::size_t bytes = sizeof(float) * static_cast<std::size_t>(m.size());
    need(bytes);
    std::memcpy(m.data(), data_.data() + pos_, bytes);
    pos_ += bytes;
    return m;
  }
  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > data_.size()) throw FormatError("truncated state blob");
  }
  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_BLOB_HPP_
