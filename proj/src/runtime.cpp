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

#include "pi2pc/runtime.hpp"

#include <cstdio>
#include <future>
#include <map>

#include <nlohmann/json.hpp>

#include "pi2pc/bytes.hpp"
#include "pi2pc/error.hpp"
#include "pi2pc/operators.hpp"
#include "pi2pc/session.hpp"

namespace pi2pc {
namespace {

using nlohmann::json;

constexpr uint64_t kDealerLabel = 0xdea1e7;

LayerReport measure(const TranscriptReport& before,
                    const TranscriptReport& after) {
  const TranscriptReport d = after - before;
  const TrafficCounters link = d.link();
  LayerReport r;
  r.virtual_latency_s = link.virtual_time;
  r.comm_bytes = link.bytes;
  r.messages = link.messages;
  r.rounds = d.rounds;
  return r;
}

double modeled_latency(const LayerSpec& l, const HardwareProfile& hw) {
  const auto kind = op_kind_of(l.kind);
  if (!kind) return 0.0;
  return model_operator(*kind, layer_geometry(l), hw).latency_s;
}

struct Params {
  std::vector<ShareTensor> tensors;
  size_t next = 0;
  const ShareTensor& take() { return tensors.at(next++); }
};

ShareTensor run_layer(const LayerSpec& l, const ShareTensor& x, Params& params,
                      Session& s) {
  switch (l.kind) {
    case LayerKind::kConv: {
      const ShareTensor& w = params.take();
      const ShareTensor* b = l.bias ? &params.take() : nullptr;
      return conv2pc(x, w, b, l.conv, s);
    }
    case LayerKind::kDense: {
      const ShareTensor& w = params.take();
      const ShareTensor* b = l.bias ? &params.take() : nullptr;
      return dense2pc(x, w, b, s);
    }
    case LayerKind::kRelu: return relu2pc(x, s);
    case LayerKind::kX2act: return x2act2pc(x, l.x2act, s);
    case LayerKind::kMaxPool: return maxpool2pc(x, l.pool, s);
    case LayerKind::kAvgPool: return avgpool2pc(x, l.pool, s);
    case LayerKind::kFlatten:
      return {x.party, x.values.reshaped(l.output_shape)};
  }
  throw ContractError("unhandled layer kind");
}

// S0 shares the weights; S1 shares its inputs. Returns this party's
// parameter shares and input shares.
std::pair<Params, std::vector<ShareTensor>> provision(
    PartyId party, const GraphSpec& g, Channel& ch, Prg& rng,
    const std::vector<RingTensor>& weights,
    const std::vector<RingTensor>& inputs) {
  const auto shapes = g.parameter_shapes();
  const size_t per_input = shape_size(g.input_shape);
  Params params;
  std::vector<ShareTensor> xs;
  if (party == PartyId::kS0) {
    require(weights.size() == shapes.size(), "run: weight count mismatch");
    ByteWriter w;
    for (size_t i = 0; i < shapes.size(); ++i) {
      require(weights[i].shape() == shapes[i], "run: weight shape mismatch");
      auto sh = share(weights[i], rng);
      params.tensors.push_back(sh.s0);
      w.put_words(sh.s1.values.words());
    }
    ch.send(MsgType::kShareWeights, w.bytes());
    const auto msg = ch.recv(MsgType::kShareInput);
    ByteReader r(msg);
    const uint32_t n = r.get_u32();
    for (uint32_t i = 0; i < n; ++i) {
      xs.push_back({party, RingTensor(g.input_shape, r.get_words(per_input),
                                      g.fp)});
    }
    r.expect_end();
  } else {
    const auto msg = ch.recv(MsgType::kShareWeights);
    ByteReader r(msg);
    for (const Shape& s : shapes) {
      params.tensors.push_back(
          {party, RingTensor(s, r.get_words(shape_size(s)), g.fp)});
    }
    r.expect_end();
    ByteWriter w;
    w.put_u32(uint32_t(inputs.size()));
    for (const RingTensor& x : inputs) {
      require(x.shape() == g.input_shape, "run: input shape mismatch");
      auto sh = share(x, rng);
      xs.push_back(sh.s1);
      w.put_words(sh.s0.values.words());
    }
    ch.send(MsgType::kShareInput, w.bytes());
  }
  return {std::move(params), std::move(xs)};
}

json layer_json(const LayerReport& l) {
  return {{"id", l.id},
          {"kind", l.kind},
          {"virtual_latency_s", l.virtual_latency_s},
          {"comm_bytes", l.comm_bytes},
          {"rounds", l.rounds},
          {"messages", l.messages},
          {"modeled_latency_s", l.modeled_latency_s}};
}

LayerReport layer_from_json(const json& j) {
  LayerReport l;
  l.id = j.at("id").get<std::string>();
  l.kind = j.at("kind").get<std::string>();
  l.virtual_latency_s = j.at("virtual_latency_s").get<double>();
  l.comm_bytes = j.at("comm_bytes").get<uint64_t>();
  l.rounds = j.at("rounds").get<uint64_t>();
  l.messages = j.at("messages").get<uint64_t>();
  l.modeled_latency_s = j.at("modeled_latency_s").get<double>();
  return l;
}

}  // namespace

LayerReport& LayerReport::operator+=(const LayerReport& o) {
  virtual_latency_s += o.virtual_latency_s;
  comm_bytes += o.comm_bytes;
  rounds += o.rounds;
  messages += o.messages;
  modeled_latency_s += o.modeled_latency_s;
  return *this;
}

void RunReport::compute_totals() {
  totals = LayerReport{};
  totals.id = "total";
  totals.kind = "total";
  for (const auto& l : layers) totals += l;
}

Prg dealer_rng(uint64_t seed) { return Prg(seed).derive(kDealerLabel); }

Prg party_rng(uint64_t seed, PartyId party) {
  return Prg(seed).derive(1 + uint64_t(index_of(party)));
}

StreamPair deal_inference(const GraphSpec& g, size_t count, Prg rng) {
  g.validate();
  Dealer d(std::move(rng), g.fp.total_bits);
  StreamPair out = make_streams();
  const int f = g.fp.frac_bits;
  for (size_t n = 0; n < count; ++n) {
    for (const LayerSpec& l : g.layers) {
      switch (l.kind) {
        case LayerKind::kConv: deal_conv(d, out, l.conv, f); break;
        case LayerKind::kDense:
          deal_dense(d, out, l.conv.in_channels, l.conv.out_channels, f);
          break;
        case LayerKind::kRelu: deal_relu(d, out, l.input_shape); break;
        case LayerKind::kX2act:
          deal_x2act(d, out, l.input_shape, l.x2act, g.fp);
          break;
        case LayerKind::kMaxPool: deal_maxpool(d, out, l.pool); break;
        case LayerKind::kAvgPool: deal_avgpool(d, out, l.pool, f); break;
        case LayerKind::kFlatten: break;
      }
    }
  }
  return out;
}

RunReport run_party(PartyId party, const GraphSpec& g,
                    const HardwareProfile& hw, Channel& ch,
                    CorrelatedStream& corr,
                    const std::vector<RingTensor>& weights,
                    const std::vector<RingTensor>& inputs, uint64_t seed,
                    const OtParams& ot) {
  g.validate();
  require(corr.party() == party, "run: correlated stream of other party");
  Session s(party, ch, corr, party_rng(seed, party), g.fp, ot);

  RunReport report;
  report.role = party == PartyId::kS0 ? "server0" : "server1";
  auto before = ch.report();
  auto [params, xs] = provision(party, g, ch, s.rng, weights, inputs);
  auto after = ch.report();
  LayerReport prov = measure(before, after);
  prov.id = "provision";
  prov.kind = "share";
  report.layers.push_back(prov);
  for (const LayerSpec& l : g.layers) {
    LayerReport lr;
    lr.id = l.id;
    lr.kind = to_string(l.kind);
    report.layers.push_back(lr);
  }
  report.inputs = xs.size();

  for (const ShareTensor& x0 : xs) {
    params.next = 0;
    ShareTensor x = x0;
    for (size_t i = 0; i < g.layers.size(); ++i) {
      const LayerSpec& l = g.layers[i];
      before = ch.report();
      try {
        x = run_layer(l, x, params, s);
      } catch (const ProtocolAbort& e) {
        throw ProtocolAbort("layer '" + l.id + "': " + e.what());
      }
      after = ch.report();
      LayerReport m = measure(before, after);
      m.modeled_latency_s = modeled_latency(l, hw);
      report.layers[i + 1] += m;
    }
    before = ch.report();
    if (party == PartyId::kS0) {
      ByteWriter w;
      w.put_words(x.values.words());
      ch.send(MsgType::kReveal, w.bytes());
    } else {
      const auto msg = ch.recv(MsgType::kReveal);
      ByteReader r(msg);
      RingTensor peer(x.shape(), r.get_words(x.size()), g.fp);
      r.expect_end();
      report.logits.push_back(x.values + peer);
    }
    after = ch.report();
    report.layers[0] += measure(before, after);
  }
  report.transcript_digest = ch.transcript_digest();
  report.compute_totals();
  return report;
}

std::pair<RunReport, RunReport> run_loopback(
    const GraphSpec& g, const HardwareProfile& hw,
    const std::vector<RingTensor>& weights,
    const std::vector<RingTensor>& inputs, uint64_t seed) {
  hw.validate();
  StreamPair streams = deal_inference(g, inputs.size(), dealer_rng(seed));
  auto [c0, c1] = make_loopback_pair(1, SimParams::from_env(hw.sim()));
  auto party = [&](PartyId p, std::unique_ptr<Channel>& ch) {
    try {
      return run_party(p, g, hw, *ch, streams[p], weights, inputs, seed);
    } catch (...) {
      ch.reset();
      throw;
    }
  };
  auto fut = std::async(std::launch::async, party, PartyId::kS1, std::ref(c1));
  std::optional<RunReport> r0;
  std::exception_ptr err;
  try {
    r0 = party(PartyId::kS0, c0);
  } catch (...) {
    err = std::current_exception();
  }
  RunReport r1 = fut.get();
  if (err) std::rethrow_exception(err);
  return {std::move(*r0), std::move(r1)};
}

RingTensor run_plain_reference(const GraphSpec& g, const RingTensor& input,
                               const std::vector<RingTensor>& weights) {
  g.validate();
  require(input.shape() == g.input_shape, "reference: input shape mismatch");
  require(weights.size() == g.parameter_shapes().size(),
          "reference: weight count mismatch");
  size_t next = 0;
  RingTensor x = input;
  for (const LayerSpec& l : g.layers) {
    switch (l.kind) {
      case LayerKind::kConv: {
        const RingTensor& w = weights.at(next++);
        const RingTensor* b = l.bias ? &weights.at(next++) : nullptr;
        x = conv_plain(x, w, b, l.conv);
        break;
      }
      case LayerKind::kDense: {
        const RingTensor& w = weights.at(next++);
        const RingTensor* b = l.bias ? &weights.at(next++) : nullptr;
        x = dense_plain(x, w, b);
        break;
      }
      case LayerKind::kRelu: x = relu_plain(x); break;
      case LayerKind::kX2act: x = x2act_plain(x, l.x2act); break;
      case LayerKind::kMaxPool: x = maxpool_plain(x, l.pool); break;
      case LayerKind::kAvgPool: x = avgpool_plain(x, l.pool); break;
      case LayerKind::kFlatten: x = x.reshaped(l.output_shape); break;
    }
  }
  return x;
}

std::string report_render(const RunReport& r, ReportFormat format) {
  if (format == ReportFormat::kJson) {
    json j;
    j["role"] = r.role;
    j["inputs"] = r.inputs;
    j["layers"] = json::array();
    for (const auto& l : r.layers) j["layers"].push_back(layer_json(l));
    j["totals"] = layer_json(r.totals);
    j["logits"] = json::array();
    j["logits_fixed"] = json::array();
    for (const auto& t : r.logits) {
      j["logits"].push_back(fp_decode(t));
      j["logits_fixed"].push_back(t.to_signed_vector());
    }
    if (!r.logits.empty()) {
      j["fp"] = {{"total_bits", r.logits[0].fp().total_bits},
                 {"frac_bits", r.logits[0].fp().frac_bits}};
    }
    j["transcript_digest"] = r.transcript_digest;
    return j.dump(2) + "\n";
  }

  // Table grouped by operator kind, in first-appearance order.
  std::vector<std::string> order;
  std::map<std::string, LayerReport> groups;
  std::map<std::string, size_t> counts;
  for (const auto& l : r.layers) {
    if (!groups.count(l.kind)) order.push_back(l.kind);
    groups[l.kind].kind = l.kind;
    groups[l.kind] += l;
    ++counts[l.kind];
  }
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-10s %6s %14s %12s %8s %14s %7s\n",
                "kind", "layers", "virtual_s", "comm_bytes", "rounds",
                "modeled_s", "model%");
  out += line;
  for (const auto& k : order) {
    const LayerReport& g = groups[k];
    const double share = r.totals.modeled_latency_s > 0
                             ? 100.0 * g.modeled_latency_s /
                                   r.totals.modeled_latency_s
                             : 0.0;
    std::snprintf(line, sizeof line,
                  "%-10s %6zu %14.6e %12llu %8llu %14.6e %6.2f%%\n", k.c_str(),
                  counts[k], g.virtual_latency_s,
                  static_cast<unsigned long long>(g.comm_bytes),
                  static_cast<unsigned long long>(g.rounds),
                  g.modeled_latency_s, share);
    out += line;
  }
  std::snprintf(line, sizeof line, "%-10s %6zu %14.6e %12llu %8llu %14.6e\n",
                "total", r.layers.size(), r.totals.virtual_latency_s,
                static_cast<unsigned long long>(r.totals.comm_bytes),
                static_cast<unsigned long long>(r.totals.rounds),
                r.totals.modeled_latency_s);
  out += line;
  out += "inputs " + std::to_string(r.inputs) + ", role " + r.role + "\n";
  return out;
}

RunReport report_from_json(const std::string& text) {
  RunReport r;
  try {
    const json j = json::parse(text);
    r.role = j.at("role").get<std::string>();
    r.inputs = j.at("inputs").get<size_t>();
    for (const auto& l : j.at("layers")) r.layers.push_back(layer_from_json(l));
    r.totals = layer_from_json(j.at("totals"));
    r.transcript_digest = j.at("transcript_digest").get<std::string>();
    if (!j.at("logits_fixed").empty()) {
      FixedPointConfig fp;
      fp.total_bits = j.at("fp").at("total_bits").get<int>();
      fp.frac_bits = j.at("fp").at("frac_bits").get<int>();
      for (const auto& v : j.at("logits_fixed")) {
        const auto vals = v.get<std::vector<int64_t>>();
        r.logits.push_back(RingTensor::from_signed({vals.size()}, vals, fp));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run report: ") + e.what());
  }
  return r;
}

}  // namespace pi2pc
