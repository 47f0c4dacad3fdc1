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


#ifndef SACREDIT_SR_MEMORY_HPP_
#define SACREDIT_SR_MEMORY_HPP_

#include <cstdint>
#include <string>

#include "sacredit/errors.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::sr {

// Per-episode buffer of state representations. Entry k is the representation
// at episode step k. Owned by one actor; the learner only sees copies.
template <typename T>
class EpisodicMemory {
 public:
  EpisodicMemory(int capacity, int width) : capacity_(capacity), width_(width), rows_(capacity, width) {
    if (capacity < 1 || width < 1) throw ConfigError("episodic memory needs positive capacity and width");
  }

  int capacity() const { return capacity_; }
  int width() const { return width_; }
  int size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::uint64_t episode() const { return episode_; }

  template <typename Row>
  void append(const Row& s) {
    if (size_ >= capacity_) {
      throw ConfigError("episodic memory overflow: capacity " + std::to_string(capacity_) +
                        " must equal the maximum episode length");
    }
    if (s.size() != width_) throw ConfigError("memory entry has the wrong width");
    rows_.row(size_) = s;
    ++size_;
  }

  // Called exactly at episode boundaries.
  void clear() {
    size_ = 0;
    ++episode_;
  }

  auto entry(int k) const { return rows_.row(k); }
  // Entries [0, size) as a (size x width) block.
  auto entries() const { return rows_.topRows(size_); }

 private:
  int capacity_;
  int width_;
  int size_ = 0;
  std::uint64_t episode_ = 0;
  nn::Mat<T> rows_;
};

}  // namespace sacredit::sr

#endif  // SACREDIT_SR_MEMORY_HPP_
