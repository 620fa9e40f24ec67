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

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>

#include "pi2pc/random.hpp"
#include "pi2pc/ring.hpp"

namespace pi2pc {

enum class PartyId : uint8_t { kS0 = 0, kS1 = 1 };

inline int index_of(PartyId p) { return static_cast<int>(p); }
inline PartyId other(PartyId p) {
  return p == PartyId::kS0 ? PartyId::kS1 : PartyId::kS0;
}
const char* to_string(PartyId p);

/// One party's additive share of a RingTensor.
struct ShareTensor {
  PartyId party = PartyId::kS0;
  RingTensor values;

  const Shape& shape() const { return values.shape(); }
  size_t size() const { return values.size(); }
  const FixedPointConfig& fp() const { return values.fp(); }
};

template <class T>
struct PartyPair {
  T s0;
  T s1;

  T& operator[](PartyId p) { return p == PartyId::kS0 ? s0 : s1; }
  const T& operator[](PartyId p) const { return p == PartyId::kS0 ? s0 : s1; }
};

/// Splits x into (r, x - r) with r uniform over the ring.
PartyPair<ShareTensor> share(const RingTensor& x, Prg& rng);

/// Sharing with a caller-chosen mask, for hand-checked vectors.
PartyPair<ShareTensor> share_with_mask(const RingTensor& x,
                                       const RingTensor& r);

/// x_S0 + x_S1. Throws ContractError if both shares carry the same party id.
RingTensor reconstruct(const ShareTensor& a, const ShareTensor& b);

/// a*X + Y on one party's shares; no communication.
ShareTensor affine_local(Word a, const ShareTensor& x, const ShareTensor& y);

/// Adds a public tensor to a sharing: only S0 adds, S1 passes through.
ShareTensor add_public(const ShareTensor& x, const RingTensor& c);

/// Share of a public value: S0 holds c, S1 holds zero.
ShareTensor public_share(PartyId party, const RingTensor& c);

ShareTensor operator+(const ShareTensor& a, const ShareTensor& b);
ShareTensor operator-(const ShareTensor& a, const ShareTensor& b);
ShareTensor scale(const ShareTensor& a, Word s);

// On disk a share is the tensor record followed by one party-id byte.
void write_share(std::ostream& os, const ShareTensor& s);
ShareTensor read_share(std::istream& is);

}  // namespace pi2pc
