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

#include "pi2pc/sharing.hpp"

#include <istream>
#include <ostream>

#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

void require_party(const ShareTensor& a, const ShareTensor& b,
                   const char* op) {
  if (a.party != b.party) {
    throw ContractError(std::string(op) + ": shares belong to different parties");
  }
}

}  // namespace

const char* to_string(PartyId p) { return p == PartyId::kS0 ? "S0" : "S1"; }

PartyPair<ShareTensor> share(const RingTensor& x, Prg& rng) {
  RingTensor r(x.shape(), x.fp());
  auto words = r.mutable_words();
  for (auto& w : words) w = rng.next_u32();
  r.reduce();
  return share_with_mask(x, r);
}

PartyPair<ShareTensor> share_with_mask(const RingTensor& x,
                                       const RingTensor& r) {
  return {{PartyId::kS0, r}, {PartyId::kS1, x - r}};
}

RingTensor reconstruct(const ShareTensor& a, const ShareTensor& b) {
  if (a.party == b.party) {
    throw ContractError("reconstruct: both shares belong to " +
                        std::string(to_string(a.party)));
  }
  return a.values + b.values;
}

ShareTensor affine_local(Word a, const ShareTensor& x, const ShareTensor& y) {
  require_party(x, y, "affine_local");
  return {x.party, scale(x.values, a) + y.values};
}

ShareTensor add_public(const ShareTensor& x, const RingTensor& c) {
  if (x.party == PartyId::kS1) return x;
  return {x.party, x.values + c};
}

ShareTensor public_share(PartyId party, const RingTensor& c) {
  if (party == PartyId::kS0) return {party, c};
  return {party, RingTensor(c.shape(), c.fp())};
}

ShareTensor operator+(const ShareTensor& a, const ShareTensor& b) {
  require_party(a, b, "share add");
  return {a.party, a.values + b.values};
}

ShareTensor operator-(const ShareTensor& a, const ShareTensor& b) {
  require_party(a, b, "share sub");
  return {a.party, a.values - b.values};
}

ShareTensor scale(const ShareTensor& a, Word s) {
  return {a.party, scale(a.values, s)};
}

void write_share(std::ostream& os, const ShareTensor& s) {
  write_tensor(os, s.values);
  os.put(char(index_of(s.party)));
}

ShareTensor read_share(std::istream& is) {
  RingTensor t = read_tensor(is);
  const int id = is.get();
  if (id != 0 && id != 1) throw ConfigError("share file: bad party id");
  return {static_cast<PartyId>(id), std::move(t)};
}

}  // namespace pi2pc
