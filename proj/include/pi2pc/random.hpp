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

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>

namespace pi2pc {

/// Seedable ChaCha20 keystream generator. Satisfies
/// UniformRandomBitGenerator so it plugs into <random> distributions.
///
/// Every protocol and the dealer draw from a Prg handed to them; two runs
/// with the same seed replay the same transcript.
class Prg {
 public:
  using result_type = uint64_t;
  using Key = std::array<uint8_t, 32>;

  explicit Prg(uint64_t seed);
  explicit Prg(const Key& key);

  /// Seeds from the operating system entropy pool.
  static Prg from_entropy();

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()();
  uint32_t next_u32();
  bool next_bit();
  void fill(std::span<uint8_t> out);

  /// Uniform integer in [0, bound) by rejection; bound must be non-zero.
  uint64_t uniform(uint64_t bound);

  /// Independent child stream; the parent's state is left untouched.
  Prg derive(uint64_t label) const;

 private:
  void refill();

  Key key_{};
  uint64_t block_ = 0;
  std::array<uint8_t, 512> buffer_{};
  size_t pos_ = 512;
};

}  // namespace pi2pc
