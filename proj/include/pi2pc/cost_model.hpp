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
#include <optional>
#include <string>
#include <vector>

#include "pi2pc/graph.hpp"
#include "pi2pc/operators.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {

/// Compute and link profile of the latency model.
struct HardwareProfile {
  double pp = 4.0;      // lanes per cycle
  double freq = 2e8;    // Hz
  double t_bc = 50e-6;  // seconds per message
  double rt_bw = 8e9;   // bits per second

  /// PP, freq and Rt_bw must be positive; T_bc non-negative.
  void validate() const;
  SimParams sim() const { return {t_bc, rt_bw}; }

  static HardwareProfile parse(const std::string& json_text);
  static HardwareProfile load(const std::string& path);
  std::string to_json() const;

  bool operator==(const HardwareProfile&) const = default;
};

/// Terms of one OT comparison flow over FI^2 * IC elements. COMM bits are
/// the numerators of the corresponding time terms.
struct OtFlowTerms {
  double cmp2 = 0, cmp3 = 0, cmp4 = 0;
  double comm1 = 0, comm2 = 0, comm3 = 0, comm4 = 0;
  double comm1_bits = 0, comm2_bits = 0, comm3_bits = 0, comm4_bits = 0;

  double cmp() const { return cmp2 + cmp3 + cmp4; }
  double comm() const { return comm1 + comm2 + comm3 + comm4; }
  double bits() const {
    return comm1_bits + comm2_bits + comm3_bits + comm4_bits;
  }
};

OtFlowTerms model_ot_flow(const LayerGeometry& g, const HardwareProfile& hw);

enum class OpKind { kReLU, kMaxPool, kAvgPool, kX2act, kConv };

const char* to_string(OpKind k);
/// Accepts the LUT names (ReLU, MaxPool, AvgPool, X2act, Conv) and the
/// graph layer names; ContractError otherwise.
OpKind parse_op_kind(const std::string& name);
/// Modelled operator of a graph layer kind; flatten has none.
std::optional<OpKind> op_kind_of(LayerKind k);

struct LatencyEntry {
  std::string layer_id;
  OpKind kind = OpKind::kReLU;
  LayerGeometry geom;
  double latency_s = 0;
  double comm_bits = 0;
  int rounds = 0;

  bool operator==(const LatencyEntry&) const = default;
};

/// Closed-form latency, communication and message rounds of one operator.
LatencyEntry model_operator(OpKind kind, const LayerGeometry& g,
                            const HardwareProfile& hw);

struct LatencyTable {
  int version = 1;
  HardwareProfile hw;
  std::vector<LatencyEntry> entries;

  const LatencyEntry* find(const std::string& layer_id, OpKind kind) const;
  double total_latency() const;

  bool operator==(const LatencyTable&) const = default;
};

/// One entry per (layer, candidate); ungated layers contribute their own
/// kind. Dense layers are modelled as 1x1 convolutions.
LatencyTable build_lut(const GraphSpec& graph, const HardwareProfile& hw);
/// Geometry key for a layer as the latency model sees it.
LayerGeometry layer_geometry(const LayerSpec& layer);

std::string lut_to_json(const LatencyTable& t);
LatencyTable lut_from_json(const std::string& text);
void export_lut(const LatencyTable& t, const std::string& path);
LatencyTable import_lut(const std::string& path);

struct ValidationReport {
  double model_bits = 0;
  double measured_bits = 0;
  double relative_error = 0;  // |model - measured| / model, 0 if model is 0
  int model_rounds = 0;
  int64_t measured_rounds = 0;
  int64_t round_delta = 0;   // measured - model
  uint64_t ot_flow_bytes = 0;
  uint64_t comparison_batches = 0;  // step-1 messages seen
};

/// Compares a model entry with one endpoint's counters for the same
/// operator call (a report difference). For ReLU and MaxPool the measured
/// bits are the OT-flow frames; otherwise all frames. Rounds are the
/// endpoint's round counter.
ValidationReport validate_against_transcript(const LatencyEntry& entry,
                                             const TranscriptReport& r);

}  // namespace pi2pc
