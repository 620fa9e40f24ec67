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
#include <string>
#include <utility>
#include <vector>

#include "pi2pc/correlated.hpp"
#include "pi2pc/cost_model.hpp"
#include "pi2pc/graph.hpp"
#include "pi2pc/ot.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {

struct LayerReport {
  std::string id;
  std::string kind;
  double virtual_latency_s = 0;  // both directions on this endpoint's link
  uint64_t comm_bytes = 0;       // sent + received, headers included
  uint64_t rounds = 0;
  uint64_t messages = 0;         // sent + received
  double modeled_latency_s = 0;

  LayerReport& operator+=(const LayerReport& o);
  bool operator==(const LayerReport&) const = default;
};

/// One party's view of a run. Layer metrics are summed over all inputs;
/// the first entry covers weight and input provisioning.
struct RunReport {
  std::string role;
  size_t inputs = 0;
  std::vector<LayerReport> layers;
  LayerReport totals;
  std::vector<RingTensor> logits;  // filled at the result owner (S1)
  std::string transcript_digest;

  void compute_totals();
};

/// Correlated randomness for `count` inferences of `g`, in the order the
/// online phase consumes it.
StreamPair deal_inference(const GraphSpec& g, size_t count, Prg rng);

/// Generators derived from the run seed.
Prg dealer_rng(uint64_t seed);
Prg party_rng(uint64_t seed, PartyId party);

/// Executes one server's side. S0 supplies `weights`, S1 supplies
/// `inputs`; the other argument is ignored. Logits are revealed to S1.
/// Aborts carry the failing layer id.
RunReport run_party(PartyId party, const GraphSpec& g,
                    const HardwareProfile& hw, Channel& ch,
                    CorrelatedStream& corr,
                    const std::vector<RingTensor>& weights,
                    const std::vector<RingTensor>& inputs, uint64_t seed,
                    const OtParams& ot = OtParams::default_group());

/// Both servers in-process with an inline dealer.
std::pair<RunReport, RunReport> run_loopback(
    const GraphSpec& g, const HardwareProfile& hw,
    const std::vector<RingTensor>& weights,
    const std::vector<RingTensor>& inputs, uint64_t seed);

/// Plaintext fixed-point execution with the secure rounding schedule.
RingTensor run_plain_reference(const GraphSpec& g, const RingTensor& input,
                               const std::vector<RingTensor>& weights);

enum class ReportFormat { kJson, kTable };

std::string report_render(const RunReport& r, ReportFormat fmt);
/// Parses the JSON rendering back (logits are restored as ring values).
RunReport report_from_json(const std::string& text);

}  // namespace pi2pc
