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

#include <cmath>
#include <cstdio>

#include "pi2pc/cost_model.hpp"
#include "pi2pc/error.hpp"
#include "pi2pc/model_zoo.hpp"

namespace pi2pc {
namespace {

HardwareProfile no_base_latency() {
  HardwareProfile hw;
  hw.t_bc = 0.0;
  return hw;
}

LayerGeometry map(size_t fi, size_t ic) {
  return LayerGeometry::from_map({ic, fi, fi});
}

void expect_rel(double got, double want, double tol = 1e-12) {
  EXPECT_LE(std::abs(got - want), tol * std::abs(want))
      << "got " << got << " want " << want;
}

TEST(OtFlowModel, GoldenTerms) {
  const OtFlowTerms t = model_ot_flow(map(8, 4), no_base_latency());
  expect_rel(t.cmp2, 1.7408e-4);
  expect_rel(t.comm2, 1.6384e-5);
  expect_rel(t.cmp3, 8.2944e-4);
  expect_rel(t.cmp4, 6.5568e-4);
  expect_rel(t.comm1, 4e-9);
  expect_rel(t.comm3, 6.5536e-5);
  expect_rel(t.comm4, 3.2e-8);
  EXPECT_EQ(t.comm2_bits, 32.0 * 16 * 256);
  EXPECT_EQ(t.bits(), 32.0 + 256 * (512 + 2048 + 1));

  const OtFlowTerms one = model_ot_flow(map(1, 1), no_base_latency());
  expect_rel(one.cmp4, 2.56125e-6);
}

TEST(OtFlowModel, BaseLatencyPerMessage) {
  HardwareProfile hw;
  hw.t_bc = 1e-3;
  const OtFlowTerms a = model_ot_flow(map(8, 4), hw);
  const OtFlowTerms b = model_ot_flow(map(8, 4), no_base_latency());
  expect_rel(a.comm() - b.comm(), 4e-3, 1e-9);
  EXPECT_EQ(a.cmp(), b.cmp());
}

TEST(OperatorModel, GoldenValues) {
  const HardwareProfile hw = no_base_latency();
  const LatencyEntry x2 = model_operator(OpKind::kX2act, map(8, 4), hw);
  expect_rel(x2.latency_s, 2.688e-6);
  EXPECT_EQ(x2.rounds, 2);
  EXPECT_EQ(x2.comm_bits, 2 * 32.0 * 256);

  const LatencyEntry avg = model_operator(OpKind::kAvgPool, map(8, 4), hw);
  expect_rel(avg.latency_s, 6.4e-7);
  EXPECT_EQ(avg.comm_bits, 0.0);
  EXPECT_EQ(avg.rounds, 0);

  const LatencyEntry relu = model_operator(OpKind::kReLU, map(8, 4), hw);
  expect_rel(relu.latency_s, 1.741156e-3);
  const LatencyEntry maxp = model_operator(OpKind::kMaxPool, map(8, 4), hw);
  expect_rel(maxp.latency_s, 1.741156e-3);

  LayerGeometry g = LayerGeometry::from_conv({4, 8, 8, 16, 3, 3, 1, 1});
  const LatencyEntry conv = model_operator(OpKind::kConv, g, hw);
  expect_rel(conv.latency_s, 1.40288e-4);
  EXPECT_EQ(conv.rounds, 2);
}

TEST(OperatorModel, MaxPoolAddsThreeBaseLatencies) {
  HardwareProfile hw;
  hw.t_bc = 2e-4;
  const double relu = model_operator(OpKind::kReLU, map(8, 4), hw).latency_s;
  const double maxp =
      model_operator(OpKind::kMaxPool, map(8, 4), hw).latency_s;
  expect_rel(maxp - relu, 6e-4, 1e-9);
}

TEST(OperatorModel, ReluDominatesX2actAtImageNetScale) {
  // PP=4, 200 MHz, 1 GB/s link.
  for (double t_bc : {0.0, 50e-6, 1e-3}) {
    HardwareProfile hw;
    hw.t_bc = t_bc;
    const double relu =
        model_operator(OpKind::kReLU, map(56, 64), hw).latency_s;
    const double x2 =
        model_operator(OpKind::kX2act, map(56, 64), hw).latency_s;
    EXPECT_GE(relu / x2, 10.0) << "T_bc " << t_bc;
  }
}

TEST(OperatorModel, QuadraticInFeatureSize) {
  const HardwareProfile hw = no_base_latency();
  const double fixed = 32.0 / hw.rt_bw;  // step 1 carries one element
  for (OpKind k : {OpKind::kReLU, OpKind::kMaxPool, OpKind::kAvgPool,
                   OpKind::kX2act}) {
    for (size_t fi : {1, 3, 8, 20}) {
      for (size_t ic : {1, 5, 16}) {
        const bool ot = k == OpKind::kReLU || k == OpKind::kMaxPool;
        const double c = ot ? fixed : 0.0;
        const double a = model_operator(k, map(fi, ic), hw).latency_s - c;
        const double b = model_operator(k, map(2 * fi, 3 * ic), hw).latency_s - c;
        expect_rel(b, 12.0 * a, 1e-9);
      }
    }
  }
}

TEST(OperatorModel, EntriesArePositiveAndDeterministic) {
  const HardwareProfile hw;
  for (OpKind k : {OpKind::kReLU, OpKind::kMaxPool, OpKind::kAvgPool,
                   OpKind::kX2act, OpKind::kConv}) {
    const LatencyEntry a = model_operator(k, map(4, 2), hw);
    EXPECT_GT(a.latency_s, 0.0);
    EXPECT_EQ(a, model_operator(k, map(4, 2), hw));
  }
}

TEST(OperatorModel, KindNames) {
  EXPECT_EQ(parse_op_kind("ReLU"), OpKind::kReLU);
  EXPECT_EQ(parse_op_kind("x2act"), OpKind::kX2act);
  EXPECT_EQ(parse_op_kind("maxpool"), OpKind::kMaxPool);
  EXPECT_STREQ(to_string(OpKind::kAvgPool), "AvgPool");
  EXPECT_THROW(parse_op_kind("softmax"), ContractError);
  EXPECT_FALSE(op_kind_of(LayerKind::kFlatten).has_value());
  EXPECT_EQ(op_kind_of(LayerKind::kDense), OpKind::kConv);
}

TEST(HardwareProfile, ParseAndValidate) {
  const HardwareProfile hw = HardwareProfile::parse(
      R"({"PP": 8, "freq": 1e8, "T_bc": 0, "Rt_bw": 1e9})");
  EXPECT_EQ(hw.pp, 8.0);
  EXPECT_EQ(hw.t_bc, 0.0);
  EXPECT_EQ(HardwareProfile::parse(hw.to_json()), hw);
  EXPECT_THROW(HardwareProfile::parse(R"({"PP": 0})"), ConfigError);
  EXPECT_THROW(HardwareProfile::parse(R"({"T_bc": -1})"), ConfigError);
  EXPECT_THROW(HardwareProfile::parse("nope"), ConfigError);
  const HardwareProfile d = HardwareProfile::parse("{}");
  EXPECT_EQ(d, HardwareProfile{});
}

GraphSpec one_gated_layer() {
  return parse_graph(R"({
    "version": 1, "input_shape": [4, 8, 8],
    "layers": [{"id": "act", "kind": "relu", "input_shape": [4, 8, 8],
                "output_shape": [4, 8, 8], "candidates": ["relu", "x2act"]}]
  })");
}

TEST(Lut, OneEntryPerCandidate) {
  const LatencyTable t = build_lut(one_gated_layer(), HardwareProfile{});
  ASSERT_EQ(t.entries.size(), 2u);
  EXPECT_NE(t.find("act", OpKind::kReLU), nullptr);
  EXPECT_NE(t.find("act", OpKind::kX2act), nullptr);
  EXPECT_EQ(t.find("act", OpKind::kMaxPool), nullptr);
  EXPECT_EQ(t.find("act", OpKind::kReLU)->geom.fi, 8u);
}

TEST(Lut, ReferenceNetworkCoversEveryCandidate) {
  const GraphSpec g = reference_cnn();
  const LatencyTable t = build_lut(g, HardwareProfile{});
  size_t expected = 0;
  for (const LayerSpec& l : g.layers) {
    if (!op_kind_of(l.kind)) continue;
    if (l.candidates.empty()) {
      ++expected;
      EXPECT_NE(t.find(l.id, *op_kind_of(l.kind)), nullptr) << l.id;
    }
    for (LayerKind c : l.candidates) {
      ++expected;
      EXPECT_NE(t.find(l.id, *op_kind_of(c)), nullptr) << l.id;
    }
  }
  EXPECT_EQ(t.entries.size(), expected);
}

TEST(Lut, AllX2actBeatsAllRelu) {
  const HardwareProfile hw;
  for (size_t fi : {1, 4, 16, 56}) {
    for (size_t ic : {1, 8, 64}) {
      EXPECT_LT(model_operator(OpKind::kX2act, map(fi, ic), hw).latency_s,
                model_operator(OpKind::kReLU, map(fi, ic), hw).latency_s);
    }
  }
}

TEST(Lut, JsonRoundTrip) {
  const LatencyTable t = build_lut(reference_cnn(), HardwareProfile{});
  const LatencyTable back = lut_from_json(lut_to_json(t));
  ASSERT_EQ(back.entries.size(), t.entries.size());
  for (size_t i = 0; i < t.entries.size(); ++i) {
    EXPECT_EQ(back.entries[i].layer_id, t.entries[i].layer_id);
    EXPECT_EQ(back.entries[i].kind, t.entries[i].kind);
    EXPECT_EQ(back.entries[i].latency_s, t.entries[i].latency_s);
    EXPECT_EQ(back.entries[i].comm_bits, t.entries[i].comm_bits);
    EXPECT_EQ(back.entries[i].rounds, t.entries[i].rounds);
    EXPECT_EQ(back.entries[i].geom.fi, t.entries[i].geom.fi);
    EXPECT_EQ(back.entries[i].geom.k, t.entries[i].geom.k);
  }
  EXPECT_EQ(back.hw, t.hw);
  EXPECT_EQ(lut_to_json(back), lut_to_json(t));

  const std::string path = ::testing::TempDir() + "lut_roundtrip.json";
  export_lut(t, path);
  EXPECT_EQ(lut_to_json(import_lut(path)), lut_to_json(t));
  std::remove(path.c_str());
}

TEST(Lut, RejectsBadJson) {
  EXPECT_THROW(lut_from_json("{}"), ConfigError);
  EXPECT_THROW(lut_from_json(R"({"version": 2})"), ConfigError);
}

}  // namespace
}  // namespace pi2pc
