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

#include "pi2pc/compare.hpp"

#include "pi2pc/beaver.hpp"
#include "pi2pc/bytes.hpp"
#include "pi2pc/error.hpp"
#include "pi2pc/ot.hpp"

namespace pi2pc {
namespace {

// Combine-tree layer over m nodes per element. Adjacent nodes (hi, lo)
// merge to gt = gt_hi ^ (eq_hi & gt_lo), eq = eq_hi & eq_lo; the eq AND is
// skipped when the layer yields the root. An odd last node is carried.
struct TreeLayer {
  size_t m;
  size_t pairs() const { return m / 2; }
  size_t out_nodes() const { return m / 2 + m % 2; }
  bool final() const { return out_nodes() == 1; }
  size_t ands() const { return pairs() * (final() ? 1 : 2); }
};

struct Nodes {
  std::vector<uint8_t> gt, eq;
};

// AND inputs for one layer, element-major, pair-major.
void layer_inputs(const Nodes& nodes, size_t n, const TreeLayer& layer,
                  std::vector<uint8_t>& x, std::vector<uint8_t>& y) {
  x.clear();
  y.clear();
  for (size_t i = 0; i < n; ++i) {
    const size_t base = i * layer.m;
    for (size_t k = 0; k < layer.pairs(); ++k) {
      const size_t hi = base + 2 * k, lo = hi + 1;
      x.push_back(nodes.eq[hi]);
      y.push_back(nodes.gt[lo]);
      if (!layer.final()) {
        x.push_back(nodes.eq[hi]);
        y.push_back(nodes.eq[lo]);
      }
    }
  }
}

// This party's masked openings d = x ^ a, e = y ^ b, packed as d || e.
std::vector<uint8_t> and_open(const std::vector<uint8_t>& x,
                              const std::vector<uint8_t>& y,
                              const BitTriples& t, size_t offset) {
  std::vector<uint8_t> de(2 * x.size());
  for (size_t k = 0; k < x.size(); ++k) {
    de[k] = x[k] ^ t.a[offset + k];
    de[x.size() + k] = y[k] ^ t.b[offset + k];
  }
  return de;
}

std::vector<uint8_t> and_finish(PartyId party, const std::vector<uint8_t>& mine,
                                const std::vector<uint8_t>& peer,
                                const BitTriples& t, size_t offset) {
  const size_t k_count = mine.size() / 2;
  std::vector<uint8_t> z(k_count);
  for (size_t k = 0; k < k_count; ++k) {
    const uint8_t d = mine[k] ^ peer[k];
    const uint8_t e = mine[k_count + k] ^ peer[k_count + k];
    uint8_t v = t.c[offset + k] ^ (d & t.b[offset + k]) ^ (e & t.a[offset + k]);
    if (party == PartyId::kS0) v ^= d & e;
    z[k] = v;
  }
  return z;
}

Nodes layer_outputs(const Nodes& nodes, size_t n, const TreeLayer& layer,
                    const std::vector<uint8_t>& z) {
  Nodes out;
  const size_t m2 = layer.out_nodes();
  out.gt.resize(n * m2);
  out.eq.resize(n * m2);
  size_t zi = 0;
  for (size_t i = 0; i < n; ++i) {
    const size_t base = i * layer.m;
    for (size_t k = 0; k < layer.pairs(); ++k) {
      const size_t hi = base + 2 * k;
      out.gt[i * m2 + k] = nodes.gt[hi] ^ z[zi++];
      out.eq[i * m2 + k] = layer.final() ? 0 : z[zi++];
    }
    if (layer.m % 2 == 1) {
      out.gt[i * m2 + m2 - 1] = nodes.gt[base + layer.m - 1];
      out.eq[i * m2 + m2 - 1] = nodes.eq[base + layer.m - 1];
    }
  }
  return out;
}

std::vector<uint8_t> pack_bits(const std::vector<uint8_t>& bits) {
  ByteWriter w;
  w.put_bits(bits);
  return w.take();
}

std::vector<uint8_t> unpack_bits(std::span<const uint8_t> bytes, size_t n) {
  ByteReader r(bytes);
  auto bits = r.get_bits(n);
  r.expect_end();
  return bits;
}

}  // namespace

std::vector<uint8_t> reconstruct_bits(const BitShare& a, const BitShare& b) {
  require(a.party != b.party, "reconstruct_bits: both shares from one party");
  require(a.size() == b.size(), "reconstruct_bits: size mismatch");
  std::vector<uint8_t> out(a.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.bits[i] ^ b.bits[i];
  return out;
}

int chunk_count(int value_bits) {
  require(value_bits >= 1 && value_bits <= 32, "value_bits out of range");
  return (value_bits + 1) / 2;
}

std::vector<uint8_t> decompose_chunks(Word v, int value_bits) {
  const int u = chunk_count(value_bits);
  std::vector<uint8_t> out(static_cast<size_t>(u));
  for (int k = 0; k < u; ++k) out[size_t(k)] = (v >> (2 * (u - 1 - k))) & 3u;
  return out;
}

size_t and_gates(int chunks) {
  size_t total = 0;
  for (TreeLayer layer{size_t(chunks)}; layer.m > 1;
       layer = TreeLayer{layer.out_nodes()}) {
    total += layer.ands();
  }
  return total;
}

BitShare compare_2pc(const RingTensor& mine, int value_bits, BitTriples& t,
                     Session& s) {
  const PartyId party = s.party;
  const OtParams& ot = s.ot;
  Channel& ch = s.channel;
  const int u = chunk_count(value_bits);
  const size_t n = mine.size();
  require(t.party == party, "compare_2pc: bit triples of the other party");
  require(t.size() == n * and_gates(u),
          "compare_2pc: bit triple count does not match batch");
  consume(t, "compare_2pc");
  const uint64_t limit = uint64_t{1} << value_bits;
  for (size_t i = 0; i < n; ++i) {
    require(mine[i] < limit, "compare_2pc: value exceeds value_bits");
  }

  Nodes nodes;
  nodes.gt.resize(n * size_t(u));
  nodes.eq.resize(n * size_t(u));
  TreeLayer layer{size_t(u)};
  std::vector<uint8_t> x, y, de, peer;
  size_t offset = 0;

  if (party == PartyId::kS0) {
    const OtSenderState st = ot_setup_sender(ot, s.rng, ch);
    std::vector<uint32_t> payloads(n * size_t(u) * 4);
    for (size_t i = 0; i < n; ++i) {
      const auto chunks = decompose_chunks(mine[i], value_bits);
      for (size_t k = 0; k < size_t(u); ++k) {
        const size_t idx = i * size_t(u) + k;
        const uint32_t r = s.rng.next_u32();
        const uint8_t mgt = r & 1u, meq = (r >> 1) & 1u;
        nodes.gt[idx] = mgt;
        nodes.eq[idx] = meq;
        for (uint32_t j = 0; j < 4; ++j) {
          const uint32_t gt = uint32_t(chunks[k] > j) ^ mgt;
          const uint32_t eq = uint32_t(chunks[k] == j) ^ meq;
          payloads[idx * 4 + j] = gt | (eq << 1);
        }
      }
    }
    if (layer.m > 1) {
      layer_inputs(nodes, n, layer, x, y);
      de = and_open(x, y, t, offset);
    }
    ot_send(ot, st, payloads, pack_bits(de), ch);
    peer = unpack_bits(ch.recv(MsgType::kOtReply), de.size());
  } else {
    const OtReceiverState st = ot_setup_receiver(ot, ch);
    std::vector<uint8_t> choices;
    choices.reserve(n * size_t(u));
    for (size_t i = 0; i < n; ++i) {
      for (uint8_t c : decompose_chunks(mine[i], value_bits)) {
        choices.push_back(c);
      }
    }
    const auto keys = ot_choose(ot, st, choices, s.rng, ch);
    std::vector<uint8_t> trailer;
    const auto words = ot_receive(ot, keys, choices, trailer, ch);
    for (size_t idx = 0; idx < words.size(); ++idx) {
      nodes.gt[idx] = words[idx] & 1u;
      nodes.eq[idx] = (words[idx] >> 1) & 1u;
    }
    if (layer.m > 1) {
      layer_inputs(nodes, n, layer, x, y);
      de = and_open(x, y, t, offset);
    }
    peer = unpack_bits(trailer, de.size());
    ch.send(MsgType::kOtReply, pack_bits(de));
  }

  while (layer.m > 1) {
    if (offset > 0) {
      layer_inputs(nodes, n, layer, x, y);
      de = and_open(x, y, t, offset);
      peer = unpack_bits(exchange(ch, party, MsgType::kAndOpen, pack_bits(de)),
                         de.size());
    }
    const auto z = and_finish(party, de, peer, t, offset);
    nodes = layer_outputs(nodes, n, layer, z);
    offset += z.size();
    layer = TreeLayer{layer.out_nodes()};
  }

  BitShare out;
  out.party = party;
  out.shape = mine.shape();
  out.bits = std::move(nodes.gt);
  return out;
}

BitShare compare_2pc(const RingTensor& mine, int value_bits, Session& s) {
  const size_t need = mine.size() * and_gates(chunk_count(value_bits));
  BitTriples t = s.corr.take_bit_triples(need);
  return compare_2pc(mine, value_bits, t, s);
}

BitShare drelu_sign(const ShareTensor& x, Session& s) {
  require(x.party == s.party, "drelu_sign: share of the other party");
  const int w = x.values.bits();
  const Word half = Word(uint64_t{1} << (w - 1));
  const Word low_mask = half - 1;
  RingTensor v = x.values;
  if (s.party == PartyId::kS0) v = add_scalar(v, x.values.mask());  // x - 1
  RingTensor mine(v.shape(), v.fp());
  std::vector<uint8_t> msb(v.size());
  for (size_t i = 0; i < v.size(); ++i) {
    msb[i] = (v[i] >> (w - 1)) & 1u;
    const Word low = v[i] & low_mask;
    mine.set(i, s.party == PartyId::kS0 ? low : low_mask - low);
  }
  BitShare carry = compare_2pc(mine, w - 1, s);
  for (size_t i = 0; i < carry.size(); ++i) {
    carry.bits[i] ^= msb[i];
    if (s.party == PartyId::kS0) carry.bits[i] ^= 1u;
  }
  return carry;
}

ShareTensor bit_to_arith(const BitShare& b, BeaverTriple& t, Channel& ch) {
  const FixedPointConfig fp = t.a.fp();
  RingTensor mine(b.shape, fp);
  for (size_t i = 0; i < b.size(); ++i) mine.set(i, b.bits[i]);
  const RingTensor zero(b.shape, fp);
  const bool s0 = b.party == PartyId::kS0;
  const ShareTensor x{b.party, s0 ? mine : zero};
  const ShareTensor y{b.party, s0 ? zero : mine};
  const ShareTensor p = mul_2pc(x, y, t, ch);
  return {b.party, mine - scale(p.values, 2)};
}

ShareTensor bit_to_arith(const BitShare& b, Session& s) {
  BeaverTriple t = s.corr.take_triple(BilinearOp::elementwise(b.shape));
  return bit_to_arith(b, t, s.channel);
}

void deal_compare(Dealer& d, StreamPair& out, size_t n, int value_bits) {
  push(out, d.bit_triples(n * and_gates(chunk_count(value_bits))));
}

void deal_drelu(Dealer& d, StreamPair& out, size_t n) {
  deal_compare(d, out, n, d.ring_bits() - 1);
}

void deal_bit_to_arith(Dealer& d, StreamPair& out, const Shape& shape) {
  push(out, d.triple(BilinearOp::elementwise(shape)));
}

}  // namespace pi2pc
