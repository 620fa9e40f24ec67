// Copyright 2026 The pi2pc Authors.
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

#pragma once

#include <stdexcept>
#include <string>

namespace pi2pc {

// Violated precondition or misuse of an API (shape mismatch, party mismatch,
// reused correlated randomness).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Value outside the representable fixed-point range.
class RangeError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

// Interactive protocol could not complete: peer disconnect, malformed or
// unexpected message, exhausted correlated randomness.
class ProtocolAbort : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad user-supplied configuration (graph, hardware profile, files).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ContractError(what);
}

}  // namespace pi2pc
