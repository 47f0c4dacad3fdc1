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


#ifndef SACREDIT_RUNTIME_CHECKPOINT_HPP_
#define SACREDIT_RUNTIME_CHECKPOINT_HPP_

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "sacredit/errors.hpp"
#include "sacredit/nn/optimizer.hpp"
#include "sacredit/nn/param_set.hpp"

namespace sacredit::runtime {

inline constexpr char kCheckpointMagic[4] = {'S', 'A', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

// Layout: magic, u32 version, u64 config hash, u32 record count, then records
// of (u32 name length, name, u8 kind). Kind 0 is a tensor: u32 rows, u32 cols,
// rows * cols little-endian f32 in row-major order. Kind 1 is a blob: u64
// length and raw bytes. Integers are little-endian.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  std::map<std::string, nn::Mat<float>> tensors;
  std::map<std::string, std::string> blobs;

  const std::string& blob(const std::string& name) const {
    auto it = blobs.find(name);
    if (it == blobs.end()) throw FormatError("checkpoint lacks record " + name);
    return it->second;
  }
  const nn::Mat<float>& tensor(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw FormatError("checkpoint lacks record " + name);
    return it->second;
  }
};

namespace detail {

template <typename U>
void put_le(std::ostream& out, U v) {
  unsigned char bytes[sizeof(U)];
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xff);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(U));
}

template <typename U>
U get_le(std::istream& in) {
  unsigned char bytes[sizeof(U)];
  if (!in.read(reinterpret_cast<char*>(bytes), sizeof(U))) throw FormatError("checkpoint truncated");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

inline std::string get_bytes(std::istream& in, std::uint64_t n) {
  if (n > (1ull << 34)) throw FormatError("checkpoint record too large");
  std::string s(static_cast<std::size_t>(n), '\0');
  if (n > 0 && !in.read(s.data(), static_cast<std::streamsize>(n))) throw FormatError("checkpoint truncated");
  return s;
}

}  // namespace detail

inline void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
  out.write(kCheckpointMagic, 4);
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint64_t>(out, ck.config_hash);
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ck.tensors.size() + ck.blobs.size()));
  auto name = [&](const std::string& n, std::uint8_t kind) {
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(n.size()));
    out.write(n.data(), static_cast<std::streamsize>(n.size()));
    detail::put_le<std::uint8_t>(out, kind);
  };
  for (const auto& [n, m] : ck.tensors) {
    name(n, 0);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        std::uint32_t bits = 0;
        const float v = m(r, c);
        std::memcpy(&bits, &v, sizeof bits);
        detail::put_le<std::uint32_t>(out, bits);
      }
    }
  }
  for (const auto& [n, b] : ck.blobs) {
    name(n, 1);
    detail::put_le<std::uint64_t>(out, b.size());
    out.write(b.data(), static_cast<std::streamsize>(b.size()));
  }
  if (!out) throw FormatError("checkpoint write failed");
}

inline Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kCheckpointMagic, 4) != 0) throw FormatError("not a checkpoint file");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw VersionError("checkpoint format version " + std::to_string(version) + ", expected " +
                       std::to_string(kCheckpointVersion));
  }
  Checkpoint ck;
  ck.config_hash = detail::get_le<std::uint64_t>(in);
  const auto records = detail::get_le<std::uint32_t>(in);
  for (std::uint32_t k = 0; k < records; ++k) {
    const std::string n = detail::get_bytes(in, detail::get_le<std::uint32_t>(in));
    const auto kind = detail::get_le<std::uint8_t>(in);
    if (kind == 0) {
      const auto rows = detail::get_le<std::uint32_t>(in);
      const auto cols = detail::get_le<std::uint32_t>(in);
      if (static_cast<std::uint64_t>(rows) * cols > (1ull << 31)) throw FormatError("checkpoint tensor too large");
      nn::Mat<float> m(rows, cols);
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
          const auto bits = detail::get_le<std::uint32_t>(in);
          std::memcpy(&m(r, c), &bits, sizeof bits);
        }
      }
      ck.tensors[n] = std::move(m);
    } else if (kind == 1) {
      ck.blobs[n] = detail::get_bytes(in, detail::get_le<std::uint64_t>(in));
    } else {
      throw FormatError("unknown checkpoint record kind in " + n);
    }
  }
  return ck;
}

inline void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError("cannot write " + tmp);
    write_checkpoint(ck, out);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw FormatError("cannot move checkpoint into " + path);
}

inline Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open checkpoint " + path);
  return read_checkpoint(in);
}

inline void put_params(Checkpoint& ck, const std::string& prefix, const nn::ParamSet<float>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) ck.tensors[prefix + ps.name(i)] = ps.value(i);
}

// Fills every entry of `ps` from the checkpoint; shapes must match.
inline void get_params(const Checkpoint& ck, const std::string& prefix, nn::ParamSet<float>& ps) {
  for (std::size_t i = 0; i < ps.size(); ++i) {
    const auto& m = ck.tensor(prefix + ps.name(i));
    if (m.rows() != ps.value(i).rows() || m.cols() != ps.value(i).cols()) {
      throw FormatError("checkpoint tensor " + ps.name(i) + " has the wrong shape");
    }
    ps.set(i, m);
  }
}

inline void put_optimizer(Checkpoint& ck, const nn::Optimizer<float>& opt) {
  put_params(ck, "optim/first/", opt.first_moment());
  put_params(ck, "optim/second/", opt.second_moment());
  ck.blobs["optim/steps"] = std::to_string(opt.steps());
}

inline void get_optimizer(const Checkpoint& ck, nn::Optimizer<float>& opt) {
  nn::ParamSet<float> first = opt.first_moment(), second = opt.second_moment();
  get_params(ck, "optim/first/", first);
  get_params(ck, "optim/second/", second);
  opt.restore(std::move(first), std::move(second), std::stoll(ck.blob("optim/steps")));
}

}  // namespace sacredit::runtime

#endif  // SACREDIT_RUNTIME_CHECKPOINT_HPP_
