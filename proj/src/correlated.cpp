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

#include "pi2pc/correlated.hpp"

#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <ostream>
#include <sstream>
#include <type_traits>

#include "pi2pc/bytes.hpp"
#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

enum class RecordKind : uint8_t {
  kTriple = 1,
  kSquare = 2,
  kTruncation = 3,
  kBitTriples = 4,
};

void put_shape(ByteWriter& w, const Shape& s) {
  w.put_u32(uint32_t(s.size()));
  for (size_t d : s) w.put_u32(uint32_t(d));
}

Shape get_shape(ByteReader& r) {
  const uint32_t rank = r.get_u32();
  if (rank > 8) throw ProtocolAbort("rank too large");
  Shape s(rank);
  for (auto& d : s) d = r.get_u32();
  return s;
}

void put_conv(ByteWriter& w, const ConvGeometry& g) {
  for (size_t v : {g.in_channels, g.in_h, g.in_w, g.out_channels, g.kernel_h,
                   g.kernel_w, g.stride, g.pad}) {
    w.put_u32(uint32_t(v));
  }
}

ConvGeometry get_conv(ByteReader& r) {
  ConvGeometry g;
  for (size_t* v : {&g.in_channels, &g.in_h, &g.in_w, &g.out_channels,
                    &g.kernel_h, &g.kernel_w, &g.stride, &g.pad}) {
    *v = r.get_u32();
  }
  return g;
}

ShareTensor get_share(ByteReader& r, PartyId party, const Shape& shape,
                      const FixedPointConfig& fp) {
  return {party, RingTensor(shape, r.get_words(shape_size(shape)), fp)};
}

}  // namespace

BilinearOp BilinearOp::elementwise(Shape shape) {
  BilinearOp op;
  op.kind = BilinearKind::kElementwise;
  op.lhs_shape = shape;
  op.rhs_shape = std::move(shape);
  return op;
}

BilinearOp BilinearOp::matmul(size_t m, size_t k, size_t n) {
  BilinearOp op;
  op.kind = BilinearKind::kMatmul;
  op.lhs_shape = {m, k};
  op.rhs_shape = {k, n};
  return op;
}

BilinearOp BilinearOp::convolution(const ConvGeometry& g) {
  g.validate();
  BilinearOp op;
  op.kind = BilinearKind::kConv;
  op.conv = g;
  op.lhs_shape = g.input_shape();
  op.rhs_shape = g.weight_shape();
  return op;
}

Shape BilinearOp::output_shape() const {
  switch (kind) {
    case BilinearKind::kElementwise: return lhs_shape;
    case BilinearKind::kMatmul: return {lhs_shape[0], rhs_shape[1]};
    case BilinearKind::kConv: return conv.output_shape();
  }
  return {};
}

RingTensor BilinearOp::apply(const RingTensor& a, const RingTensor& b) const {
  require(a.shape() == lhs_shape && b.shape() == rhs_shape,
          "bilinear op " + describe() + ": operand shapes " +
              shape_string(a.shape()) + ", " + shape_string(b.shape()));
  switch (kind) {
    case BilinearKind::kElementwise: return a * b;
    case BilinearKind::kMatmul: return pi2pc::matmul(a, b);
    case BilinearKind::kConv: return conv2d(a, b, conv);
  }
  throw ContractError("unknown bilinear kind");
}

std::string BilinearOp::describe() const {
  switch (kind) {
    case BilinearKind::kElementwise:
      return "elementwise" + shape_string(lhs_shape);
    case BilinearKind::kMatmul:
      return "matmul" + shape_string(lhs_shape) + "x" +
             shape_string(rhs_shape);
    case BilinearKind::kConv:
      return "conv" + shape_string(lhs_shape) + "*" + shape_string(rhs_shape);
  }
  return "?";
}

Dealer::Dealer(Prg rng, int ring_bits) : rng_(std::move(rng)) {
  require(ring_bits >= 2 && ring_bits <= 32, "dealer: bad ring width");
  fp_.total_bits = ring_bits;
}

RingTensor Dealer::random_tensor(const Shape& shape) {
  RingTensor t(shape, fp_);
  for (auto& w : t.mutable_words()) w = rng_.next_u32();
  return t.reduce();
}

PartyPair<BeaverTriple> Dealer::triple(const BilinearOp& op) {
  RingTensor a = random_tensor(op.lhs_shape);
  RingTensor b = random_tensor(op.rhs_shape);
  RingTensor z = op.apply(a, b);
  auto as = split(a), bs = split(b), zs = split(z);
  return {{op, as.s0, bs.s0, zs.s0}, {op, as.s1, bs.s1, zs.s1}};
}

PartyPair<SquarePair> Dealer::square_pair(const Shape& shape) {
  RingTensor a = random_tensor(shape);
  auto as = split(a), zs = split(a * a);
  return {{as.s0, zs.s0}, {as.s1, zs.s1}};
}

PartyPair<TruncationPair> Dealer::truncation_from_masks(
    const std::vector<RingTensor>& masks, int shift,
    const std::vector<int64_t>& coeffs) {
  const int w = fp_.total_bits;
  require(shift >= 1 && shift <= w - 2,
          "truncation: shift must be in [1, ring_bits - 2]");
  require(!masks.empty() && masks.size() == coeffs.size(),
          "truncation: one coefficient per term");
  const size_t n = masks[0].size();
  PartyPair<TruncationPair> out;
  RingTensor rt(masks[0].shape(), fp_);
  for (size_t j = 0; j < n; ++j) {
    __int128 acc = 0;
    for (size_t t = 0; t < masks.size(); ++t) {
      acc += __int128(coeffs[t]) * __int128(masks[t][j]);
    }
    rt.set(j, Word(uint64_t(int64_t(acc >> shift))));
  }
  for (PartyId p : {PartyId::kS0, PartyId::kS1}) {
    out[p].shift = shift;
    out[p].coeffs = coeffs;
  }
  for (const RingTensor& m : masks) {
    require(m.size() == n, "truncation: term sizes differ");
    RingTensor msb(m.shape(), fp_);
    for (size_t j = 0; j < n; ++j) msb.set(j, (m[j] >> (w - 1)) & 1u);
    auto ms = split(m), bs = split(msb);
    for (PartyId p : {PartyId::kS0, PartyId::kS1}) {
      out[p].masks.push_back(ms[p]);
      out[p].mask_msbs.push_back(bs[p]);
    }
  }
  auto rs = split(rt);
  out.s0.rt = rs.s0;
  out.s1.rt = rs.s1;
  return out;
}

PartyPair<TruncationPair> Dealer::truncation(size_t n, int shift,
                                             int64_t coeff) {
  return truncation_from_masks({random_tensor({n})}, shift, {coeff});
}

std::pair<PartyPair<SquarePair>, PartyPair<TruncationPair>>
Dealer::square_affine(const Shape& shape, int shift, int64_t c_sq,
                      int64_t c_lin) {
  RingTensor a = random_tensor(shape);
  auto as = split(a), zs = split(a * a);
  PartyPair<SquarePair> pair{{as.s0, zs.s0}, {as.s1, zs.s1}};
  const size_t n = shape_size(shape);
  auto trunc = truncation_from_masks(
      {random_tensor({n}), (-a).reshaped({n})}, shift, {c_sq, c_lin});
  return {std::move(pair), std::move(trunc)};
}

PartyPair<BitTriples> Dealer::bit_triples(size_t n) {
  PartyPair<BitTriples> out;
  out.s0.party = PartyId::kS0;
  out.s1.party = PartyId::kS1;
  for (auto* t : {&out.s0, &out.s1}) {
    t->a.resize(n);
    t->b.resize(n);
    t->c.resize(n);
  }
  for (size_t i = 0; i < n; ++i) {
    const uint32_t r = rng_.next_u32();
    const uint8_t a = r & 1, b = (r >> 1) & 1, c = a & b;
    const uint8_t a0 = (r >> 2) & 1, b0 = (r >> 3) & 1, c0 = (r >> 4) & 1;
    out.s0.a[i] = a0;
    out.s0.b[i] = b0;
    out.s0.c[i] = c0;
    out.s1.a[i] = a ^ a0;
    out.s1.b[i] = b ^ b0;
    out.s1.c[i] = c ^ c0;
  }
  return out;
}

void CorrelatedStream::push(CorrelatedItem item) {
  const PartyId owner = std::visit(
      [](const auto& v) -> PartyId {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, BeaverTriple>) return v.a.party;
        if constexpr (std::is_same_v<T, SquarePair>) return v.a.party;
        if constexpr (std::is_same_v<T, TruncationPair>) return v.rt.party;
        if constexpr (std::is_same_v<T, BitTriples>) return v.party;
      },
      item);
  require(owner == party_, "correlated stream: item belongs to the other party");
  items_.push_back(std::move(item));
}

CorrelatedItem CorrelatedStream::pop(const char* expected) {
  if (items_.empty()) {
    throw ProtocolAbort(std::string("correlated randomness exhausted (needed ") +
                        expected + ")");
  }
  CorrelatedItem item = std::move(items_.front());
  items_.pop_front();
  return item;
}

BeaverTriple CorrelatedStream::take_triple(const BilinearOp& expected) {
  auto item = pop("beaver triple");
  auto* t = std::get_if<BeaverTriple>(&item);
  if (t == nullptr || !(t->op == expected)) {
    throw ProtocolAbort("correlated stream out of sync: expected triple for " +
                        expected.describe());
  }
  return std::move(*t);
}

SquarePair CorrelatedStream::take_square(const Shape& shape) {
  auto item = pop("square pair");
  auto* p = std::get_if<SquarePair>(&item);
  if (p == nullptr || p->a.shape() != shape) {
    throw ProtocolAbort("correlated stream out of sync: expected square pair " +
                        shape_string(shape));
  }
  return std::move(*p);
}

TruncationPair CorrelatedStream::take_truncation(size_t n, int shift) {
  auto item = pop("truncation pair");
  auto* p = std::get_if<TruncationPair>(&item);
  if (p == nullptr || p->size() != n || p->shift != shift) {
    throw ProtocolAbort("correlated stream out of sync: expected truncation of " +
                        std::to_string(n) + " by " + std::to_string(shift));
  }
  return std::move(*p);
}

BitTriples CorrelatedStream::take_bit_triples(size_t n) {
  auto item = pop("bit triples");
  auto* p = std::get_if<BitTriples>(&item);
  if (p == nullptr || p->size() != n) {
    throw ProtocolAbort("correlated stream out of sync: expected " +
                        std::to_string(n) + " bit triples");
  }
  return std::move(*p);
}

void CorrelatedStream::write(std::ostream& os) const {
  for (const auto& item : items_) {
    ByteWriter w;
    for (char c : std::string("PCR1")) w.put_u8(uint8_t(c));
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, BeaverTriple>) {
            w.put_u8(uint8_t(RecordKind::kTriple));
            w.put_u8(uint8_t(index_of(party_)));
            w.put_u8(uint8_t(v.a.values.bits()));
            w.put_u8(uint8_t(v.op.kind));
            put_shape(w, v.op.lhs_shape);
            put_shape(w, v.op.rhs_shape);
            put_conv(w, v.op.conv);
            w.put_words(v.a.values.words());
            w.put_words(v.b.values.words());
            w.put_words(v.z.values.words());
          } else if constexpr (std::is_same_v<T, SquarePair>) {
            w.put_u8(uint8_t(RecordKind::kSquare));
            w.put_u8(uint8_t(index_of(party_)));
            w.put_u8(uint8_t(v.a.values.bits()));
            put_shape(w, v.a.shape());
            w.put_words(v.a.values.words());
            w.put_words(v.z.values.words());
          } else if constexpr (std::is_same_v<T, TruncationPair>) {
            w.put_u8(uint8_t(RecordKind::kTruncation));
            w.put_u8(uint8_t(index_of(party_)));
            w.put_u8(uint8_t(v.rt.values.bits()));
            put_shape(w, v.rt.shape());
            w.put_u32(uint32_t(v.shift));
            w.put_u32(uint32_t(v.coeffs.size()));
            for (int64_t c : v.coeffs) w.put_u64(uint64_t(c));
            for (const auto& m : v.masks) w.put_words(m.values.words());
            for (const auto& m : v.mask_msbs) w.put_words(m.values.words());
            w.put_words(v.rt.values.words());
          } else {
            w.put_u8(uint8_t(RecordKind::kBitTriples));
            w.put_u8(uint8_t(index_of(party_)));
            w.put_u8(1);
            w.put_u64(v.size());
            w.put_bits(v.a);
            w.put_bits(v.b);
            w.put_bits(v.c);
          }
        },
        item);
    const auto& bytes = w.bytes();
    os.write(reinterpret_cast<const char*>(bytes.data()),
             std::streamsize(bytes.size()));
  }
}

CorrelatedStream CorrelatedStream::read(std::istream& is) {
  std::vector<uint8_t> data((std::istreambuf_iterator<char>(is)),
                            std::istreambuf_iterator<char>());
  ByteReader r(data);
  std::optional<CorrelatedStream> stream;
  try {
    while (r.remaining() > 0) {
      auto magic = r.get_bytes(4);
      if (std::string(magic.begin(), magic.end()) != "PCR1") {
        throw ConfigError("correlated randomness file: bad record magic");
      }
      const auto kind = RecordKind(r.get_u8());
      const uint8_t party_raw = r.get_u8();
      if (party_raw > 1) throw ConfigError("correlated randomness: bad party");
      const auto party = static_cast<PartyId>(party_raw);
      if (!stream) stream.emplace(party);
      if (stream->party() != party) {
        throw ConfigError("correlated randomness file mixes parties");
      }
      FixedPointConfig fp;
      fp.total_bits = r.get_u8();
      if (fp.total_bits < 1 || fp.total_bits > 32) {
        throw ConfigError("correlated randomness: bad ring width");
      }
      switch (kind) {
        case RecordKind::kTriple: {
          BilinearOp op;
          op.kind = BilinearKind(r.get_u8());
          op.lhs_shape = get_shape(r);
          op.rhs_shape = get_shape(r);
          op.conv = get_conv(r);
          BeaverTriple t{op, {}, {}, {}};
          t.a = get_share(r, party, op.lhs_shape, fp);
          t.b = get_share(r, party, op.rhs_shape, fp);
          t.z = get_share(r, party, op.output_shape(), fp);
          stream->push(std::move(t));
          break;
        }
        case RecordKind::kSquare: {
          Shape s = get_shape(r);
          SquarePair p;
          p.a = get_share(r, party, s, fp);
          p.z = get_share(r, party, s, fp);
          stream->push(std::move(p));
          break;
        }
        case RecordKind::kTruncation: {
          Shape s = get_shape(r);
          TruncationPair p;
          p.shift = int(r.get_u32());
          const uint32_t terms = r.get_u32();
          if (terms == 0 || terms > 16) {
            throw ConfigError("correlated randomness: bad term count");
          }
          for (uint32_t t = 0; t < terms; ++t) {
            p.coeffs.push_back(int64_t(r.get_u64()));
          }
          for (uint32_t t = 0; t < terms; ++t) {
            p.masks.push_back(get_share(r, party, s, fp));
          }
          for (uint32_t t = 0; t < terms; ++t) {
            p.mask_msbs.push_back(get_share(r, party, s, fp));
          }
          p.rt = get_share(r, party, s, fp);
          stream->push(std::move(p));
          break;
        }
        case RecordKind::kBitTriples: {
          const uint64_t n = r.get_u64();
          BitTriples t;
          t.party = party;
          t.a = r.get_bits(n);
          t.b = r.get_bits(n);
          t.c = r.get_bits(n);
          stream->push(std::move(t));
          break;
        }
        default:
          throw ConfigError("correlated randomness: unknown record kind");
      }
    }
  } catch (const ProtocolAbort& e) {
    throw ConfigError(std::string("correlated randomness file: ") + e.what());
  }
  if (!stream) throw ConfigError("correlated randomness file is empty");
  return std::move(*stream);
}

void CorrelatedStream::save(const std::string& path) const {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write(os);
}

CorrelatedStream CorrelatedStream::load(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read(is);
}

}  // namespace pi2pc
