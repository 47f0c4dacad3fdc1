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

#ifndef SACREDIT_ERRORS_HPP_
#define SACREDIT_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace sacredit {

// Invalid static configuration: shapes, widths, hyperparameter ranges.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An API was called in a state that does not allow it (e.g. stepping a
// finished episode).
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// Non-finite values reached a place that requires finite ones.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Checkpoint or run-directory content that cannot be decoded.
class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

class VersionError : public FormatError {
 public:
  explicit VersionError(const std::string& what) : FormatError(what) {}
};

}  // namespace sacredit

#endif  // SACREDIT_ERRORS_HPP_
