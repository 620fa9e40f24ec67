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
#include <vector>

#include "pi2pc/correlated.hpp"
#include "pi2pc/session.hpp"

namespace pi2pc {

/// One party's XOR share of a bit tensor; entries are 0 or 1.
struct BitShare {
  PartyId party = PartyId::kS0;
  Shape shape;
  std::vector<uint8_t> bits;

  size_t size() const { return bits.size(); }
};

std::vector<uint8_t> reconstruct_bits(const BitShare& a, const BitShare& b);

/// Number of 2-bit chunks covering `value_bits`.
int chunk_count(int value_bits);
/// 2-bit chunks of v, most significant first.
std::vector<uint8_t> decompose_chunks(Word v, int value_bits);
/// AND gates one comparison of `chunks` chunks consumes in the combine tree.
size_t and_gates(int chunks);

/// Strict comparison M0 > M1 of S0's value against S1's value, both below
/// 2^value_bits. Each party passes its own tensor. Four OT-flow messages
/// plus one AND exchange per further tree layer.
BitShare compare_2pc(const RingTensor& mine, int value_bits, BitTriples& t,
                     Session& s);
BitShare compare_2pc(const RingTensor& mine, int value_bits, Session& s);

/// Shares of (x > 0) for signed x with |x| < 2^(w-2).
BitShare drelu_sign(const ShareTensor& x, Session& s);

/// Arithmetic 0/1 shares of an XOR-shared bit via one elementwise Beaver
/// multiplication: b0 + b1 - 2 b0 b1.
ShareTensor bit_to_arith(const BitShare& b, BeaverTriple& t, Channel& ch);
ShareTensor bit_to_arith(const BitShare& b, Session& s);

// Dealer-side mirrors: issue exactly what the online calls above consume.
void deal_compare(Dealer& d, StreamPair& out, size_t n, int value_bits);
void deal_drelu(Dealer& d, StreamPair& out, size_t n);
void deal_bit_to_arith(Dealer& d, StreamPair& out, const Shape& shape);

}  // namespace pi2pc
