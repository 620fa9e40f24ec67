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

#include <gtest/gtest.h>

#include <sstream>

#include "pi2pc/correlated.hpp"
#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

RingTensor rec(const PartyPair<ShareTensor>& s) {
  return reconstruct(s.s0, s.s1);
}

TEST(Dealer, ElementwiseTriple) {
  Dealer d(Prg(1));
  auto t = d.triple(BilinearOp::elementwise({5}));
  EXPECT_EQ(t.s0.a.party, PartyId::kS0);
  EXPECT_EQ(t.s1.z.party, PartyId::kS1);
  const RingTensor a = reconstruct(t.s0.a, t.s1.a);
  const RingTensor b = reconstruct(t.s0.b, t.s1.b);
  EXPECT_EQ(reconstruct(t.s0.z, t.s1.z), a * b);
}

TEST(Dealer, ConvTripleMatchesPlainConv) {
  Dealer d(Prg(2));
  const ConvGeometry g{3, 6, 6, 2, 3, 3, 1, 1};
  auto t = d.triple(BilinearOp::convolution(g));
  EXPECT_EQ(t.s0.a.shape(), g.input_shape());
  EXPECT_EQ(t.s0.b.shape(), g.weight_shape());
  EXPECT_EQ(reconstruct(t.s0.z, t.s1.z),
            conv2d(reconstruct(t.s0.a, t.s1.a), reconstruct(t.s0.b, t.s1.b),
                   g));
}

TEST(Dealer, MatmulTriple) {
  Dealer d(Prg(3));
  auto t = d.triple(BilinearOp::matmul(3, 4, 2));
  EXPECT_EQ(t.s0.z.shape(), (Shape{3, 2}));
  EXPECT_EQ(reconstruct(t.s0.z, t.s1.z),
            matmul(reconstruct(t.s0.a, t.s1.a), reconstruct(t.s0.b, t.s1.b)));
}

TEST(Dealer, SquarePair) {
  Dealer d(Prg(4), 8);
  auto p = d.square_pair({100});
  const RingTensor a = reconstruct(p.s0.a, p.s1.a);
  EXPECT_EQ(a.bits(), 8);
  EXPECT_EQ(reconstruct(p.s0.z, p.s1.z), a * a);
}

TEST(Dealer, TruncationPairConsistency) {
  Dealer d(Prg(5));
  auto p = d.truncation(1000, 12, 3);
  ASSERT_EQ(p.s0.masks.size(), 1u);
  const RingTensor r = reconstruct(p.s0.masks[0], p.s1.masks[0]);
  const RingTensor msb = reconstruct(p.s0.mask_msbs[0], p.s1.mask_msbs[0]);
  const RingTensor rt = reconstruct(p.s0.rt, p.s1.rt);
  for (size_t i = 0; i < r.size(); ++i) {
    EXPECT_EQ(msb[i], r[i] >> 31);
    EXPECT_EQ(rt[i], Word((uint64_t(3) * r[i]) >> 12));
  }
  EXPECT_EQ(p.s0.shift, 12);
  EXPECT_EQ(p.s1.coeffs, std::vector<int64_t>{3});
}

TEST(Dealer, TruncationRejectsBadShift) {
  Dealer d(Prg(6));
  EXPECT_THROW(d.truncation(4, 0), ContractError);
  EXPECT_THROW(d.truncation(4, 31), ContractError);
}

TEST(Dealer, BitTriples) {
  Dealer d(Prg(7));
  auto t = d.bit_triples(500);
  ASSERT_EQ(t.s0.size(), 500u);
  int ones = 0;
  for (size_t i = 0; i < 500; ++i) {
    const int a = t.s0.a[i] ^ t.s1.a[i];
    const int b = t.s0.b[i] ^ t.s1.b[i];
    EXPECT_EQ(t.s0.c[i] ^ t.s1.c[i], a & b);
    ones += a;
  }
  EXPECT_GT(ones, 180);
  EXPECT_LT(ones, 320);
}

TEST(Dealer, SameSeedSameMaterial) {
  Dealer a(Prg(8)), b(Prg(8));
  auto ta = a.triple(BilinearOp::elementwise({4}));
  auto tb = b.triple(BilinearOp::elementwise({4}));
  EXPECT_EQ(ta.s1.z.values, tb.s1.z.values);
}

TEST(Stream, TakesInOrderAndAbortsOnMismatch) {
  Dealer d(Prg(9));
  StreamPair s = make_streams();
  push(s, d.triple(BilinearOp::elementwise({2})));
  push(s, d.bit_triples(3));
  EXPECT_EQ(s.s0.remaining(), 2u);
  EXPECT_THROW(s.s0.take_square({2}), ProtocolAbort);
  EXPECT_THROW(s.s1.take_triple(BilinearOp::elementwise({3})), ProtocolAbort);
  s = make_streams();
  push(s, d.triple(BilinearOp::elementwise({2})));
  EXPECT_NO_THROW(s.s0.take_triple(BilinearOp::elementwise({2})));
  EXPECT_THROW(s.s0.take_bit_triples(3), ProtocolAbort);
}

TEST(Stream, RejectsOtherPartysMaterial) {
  Dealer d(Prg(10));
  CorrelatedStream s(PartyId::kS0);
  auto t = d.triple(BilinearOp::elementwise({1}));
  EXPECT_THROW(s.push(t.s1), ContractError);
}

TEST(Stream, ConsumeTwiceIsContractError) {
  Dealer d(Prg(11));
  auto t = d.square_pair({1});
  consume(t.s0, "test");
  EXPECT_THROW(consume(t.s0, "test"), ContractError);
}

TEST(Stream, FileRoundTrip) {
  Dealer d(Prg(12));
  StreamPair s = make_streams();
  const ConvGeometry g{2, 4, 4, 3, 3, 3, 1, 1};
  push(s, d.triple(BilinearOp::convolution(g)));
  push(s, d.square_pair({2, 3}));
  push(s, d.truncation(6, 7, -5));
  push(s, d.bit_triples(9));
  push(s, d.triple(BilinearOp::matmul(2, 3, 4)));

  std::stringstream ss;
  s.s1.write(ss);
  const std::string bytes = ss.str();
  EXPECT_EQ(bytes.substr(0, 4), "PCR1");
  CorrelatedStream back = CorrelatedStream::read(ss);
  EXPECT_EQ(back.party(), PartyId::kS1);
  ASSERT_EQ(back.remaining(), 5u);

  BeaverTriple want = s.s1.take_triple(BilinearOp::convolution(g));
  BeaverTriple got = back.take_triple(BilinearOp::convolution(g));
  EXPECT_EQ(got.op, want.op);
  EXPECT_EQ(got.z.values, want.z.values);
  EXPECT_EQ(got.z.party, PartyId::kS1);
  EXPECT_EQ(back.take_square({2, 3}).z.values,
            s.s1.take_square({2, 3}).z.values);
  TruncationPair tw = s.s1.take_truncation(6, 7);
  TruncationPair tg = back.take_truncation(6, 7);
  EXPECT_EQ(tg.coeffs, tw.coeffs);
  EXPECT_EQ(tg.rt.values, tw.rt.values);
  EXPECT_EQ(tg.mask_msbs[0].values, tw.mask_msbs[0].values);
  BitTriples bw = s.s1.take_bit_triples(9);
  BitTriples bg = back.take_bit_triples(9);
  EXPECT_EQ(bg.c, bw.c);
  EXPECT_EQ(back.take_triple(BilinearOp::matmul(2, 3, 4)).a.values,
            s.s1.take_triple(BilinearOp::matmul(2, 3, 4)).a.values);
  EXPECT_EQ(back.remaining(), 0u);
}

TEST(Stream, FileErrors) {
  std::stringstream empty;
  EXPECT_THROW(CorrelatedStream::read(empty), ConfigError);
  std::stringstream junk("PCR2xxxx");
  EXPECT_THROW(CorrelatedStream::read(junk), ConfigError);

  Dealer d(Prg(13));
  StreamPair s = make_streams();
  push(s, d.square_pair({8}));
  std::stringstream ss;
  s.s0.write(ss);
  std::string bytes = ss.str();
  bytes.resize(bytes.size() - 3);
  std::stringstream cut(bytes);
  EXPECT_THROW(CorrelatedStream::read(cut), ConfigError);
  EXPECT_THROW(CorrelatedStream::load("/nonexistent/x.pcr"), ConfigError);
}

}  // namespace
}  // namespace pi2pc
