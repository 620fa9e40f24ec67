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
#include <deque>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include "pi2pc/error.hpp"
#include "pi2pc/random.hpp"
#include "pi2pc/ring.hpp"
#include "pi2pc/sharing.hpp"

namespace pi2pc {

enum class BilinearKind : uint8_t { kElementwise = 0, kMatmul = 1, kConv = 2 };

/// The product a Beaver triple is bound to: Hadamard, matrix product, or
/// convolution with fixed geometry.
struct BilinearOp {
  BilinearKind kind = BilinearKind::kElementwise;
  Shape lhs_shape;
  Shape rhs_shape;
  ConvGeometry conv;

  static BilinearOp elementwise(Shape shape);
  static BilinearOp matmul(size_t m, size_t k, size_t n);
  static BilinearOp convolution(const ConvGeometry& g);

  Shape output_shape() const;
  RingTensor apply(const RingTensor& a, const RingTensor& b) const;
  std::string describe() const;

  bool operator==(const BilinearOp&) const = default;
};

// Correlated randomness is single use. Protocols flip `consumed` and a second
// use raises ContractError.

struct BeaverTriple {
  BilinearOp op;
  ShareTensor a, b, z;  // z = op(a, b) under reconstruction
  bool consumed = false;
};

struct SquarePair {
  ShareTensor a, z;  // z = a * a elementwise
  bool consumed = false;
};

/// Mask material for the one-round rescale
///   floor(sum_t coeffs[t] * v_t / 2^shift)
/// over terms v_t that are opened as v_t + 2^(w-2) + masks[t].
struct TruncationPair {
  int shift = 0;
  std::vector<int64_t> coeffs;
  std::vector<ShareTensor> masks;      // R_t
  std::vector<ShareTensor> mask_msbs;  // top bit of R_t as 0/1 ring shares
  ShareTensor rt;  // floor(sum_t coeffs[t] * R_t / 2^shift), R_t unsigned
  bool consumed = false;

  size_t size() const { return rt.size(); }
};

/// XOR-shared AND triples: c = a & b.
struct BitTriples {
  PartyId party = PartyId::kS0;
  std::vector<uint8_t> a, b, c;
  bool consumed = false;

  size_t size() const { return a.size(); }
};

/// Marks correlated randomness as used; throws on reuse.
template <class T>
void consume(T& item, const char* what) {
  if (item.consumed) {
    throw ContractError(std::string(what) + ": correlated randomness reused");
  }
  item.consumed = true;
}

/// Trusted dealer issuing both parties' halves. Holds no state besides its
/// generator; issued material is not retained.
class Dealer {
 public:
  explicit Dealer(Prg rng, int ring_bits = 32);

  PartyPair<BeaverTriple> triple(const BilinearOp& op);
  PartyPair<SquarePair> square_pair(const Shape& shape);
  PartyPair<TruncationPair> truncation(size_t n, int shift, int64_t coeff = 1);
  /// Square pair for x, plus the rescale of c_sq * x^2 + c_lin * x whose
  /// linear term reuses the square's opening X - A (mask -A).
  std::pair<PartyPair<SquarePair>, PartyPair<TruncationPair>> square_affine(
      const Shape& shape, int shift, int64_t c_sq, int64_t c_lin);
  PartyPair<BitTriples> bit_triples(size_t n);

  int ring_bits() const { return fp_.total_bits; }

 private:
  RingTensor random_tensor(const Shape& shape);
  PartyPair<ShareTensor> split(const RingTensor& t) { return share(t, rng_); }
  PartyPair<TruncationPair> truncation_from_masks(
      const std::vector<RingTensor>& masks, int shift,
      const std::vector<int64_t>& coeffs);

  Prg rng_;
  FixedPointConfig fp_;
};

using CorrelatedItem =
    std::variant<BeaverTriple, SquarePair, TruncationPair, BitTriples>;

/// One party's ordered queue of correlated randomness. The online phase
/// takes items in the order the dealer issued them; running dry or finding
/// the wrong kind aborts the protocol.
class CorrelatedStream {
 public:
  explicit CorrelatedStream(PartyId party) : party_(party) {}

  PartyId party() const { return party_; }
  size_t remaining() const { return items_.size(); }
  void push(CorrelatedItem item);

  BeaverTriple take_triple(const BilinearOp& expected);
  SquarePair take_square(const Shape& shape);
  TruncationPair take_truncation(size_t n, int shift);
  BitTriples take_bit_triples(size_t n);

  // Correlated-randomness file: a sequence of records, each "PCR1", kind
  // byte, party byte, ring width byte, geometry block, raw share words.
  void write(std::ostream& os) const;
  static CorrelatedStream read(std::istream& is);
  void save(const std::string& path) const;
  static CorrelatedStream load(const std::string& path);

 private:
  CorrelatedItem pop(const char* expected);

  PartyId party_;
  std::deque<CorrelatedItem> items_;
};

using StreamPair = PartyPair<CorrelatedStream>;

inline StreamPair make_streams() {
  return {CorrelatedStream(PartyId::kS0), CorrelatedStream(PartyId::kS1)};
}

template <class T>
void push(StreamPair& streams, PartyPair<T> items) {
  streams.s0.push(std::move(items.s0));
  streams.s1.push(std::move(items.s1));
}

}  // namespace pi2pc
