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

#include "pi2pc/cost_model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

using nlohmann::json;

struct OpName {
  OpKind kind;
  const char* name;
};

constexpr OpName kOpNames[] = {
    {OpKind::kReLU, "ReLU"},   {OpKind::kMaxPool, "MaxPool"},
    {OpKind::kAvgPool, "AvgPool"}, {OpKind::kX2act, "X2act"},
    {OpKind::kConv, "Conv"},
};

// Message rounds of each operator as the latency formulas count them.
int model_rounds(OpKind k) {
  switch (k) {
    case OpKind::kReLU: return 4;
    case OpKind::kMaxPool: return 7;
    case OpKind::kAvgPool: return 0;
    case OpKind::kX2act: return 2;
    case OpKind::kConv: return 2;
  }
  return 0;
}

double read_number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError(std::string("hardware field '") + key +
                      "' must be a number");
  }
  return j[key].get<double>();
}

json geom_json(const LayerGeometry& g) {
  return {{"FI", g.fi}, {"FO", g.fo}, {"IC", g.ic}, {"OC", g.oc}, {"K", g.k}};
}

}  // namespace

void HardwareProfile::validate() const {
  if (!(pp > 0) || !(freq > 0) || !(rt_bw > 0) || !(t_bc >= 0) ||
      !std::isfinite(pp + freq + rt_bw + t_bc)) {
    throw ConfigError("hardware profile: PP, freq and Rt_bw must be positive "
                      "and T_bc non-negative");
  }
}

HardwareProfile HardwareProfile::parse(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("hardware profile is not valid JSON: ") +
                      e.what());
  }
  if (!j.is_object()) throw ConfigError("hardware profile must be an object");
  HardwareProfile hw;
  hw.pp = read_number(j, "PP", hw.pp);
  hw.freq = read_number(j, "freq", hw.freq);
  hw.t_bc = read_number(j, "T_bc", hw.t_bc);
  hw.rt_bw = read_number(j, "Rt_bw", hw.rt_bw);
  hw.validate();
  return hw;
}

HardwareProfile HardwareProfile::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open hardware profile " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

std::string HardwareProfile::to_json() const {
  return json{{"PP", pp}, {"freq", freq}, {"T_bc", t_bc}, {"Rt_bw", rt_bw}}
      .dump(2);
}

OtFlowTerms model_ot_flow(const LayerGeometry& g, const HardwareProfile& hw) {
  const double n = double(g.fi) * double(g.fi) * double(g.ic);
  const double rate = hw.pp * hw.freq;
  OtFlowTerms t;
  t.cmp2 = 32.0 * 17.0 * n / rate;
  t.cmp3 = 32.0 * (17.0 + 4.0 * 16.0) * n / rate;
  t.cmp4 = (32.0 * 4.0 * 16.0 + 1.0) * n / rate;
  t.comm1_bits = 32.0;
  t.comm2_bits = 32.0 * 16.0 * n;
  t.comm3_bits = 32.0 * 4.0 * 16.0 * n;
  t.comm4_bits = n;
  t.comm1 = hw.t_bc + t.comm1_bits / hw.rt_bw;
  t.comm2 = hw.t_bc + t.comm2_bits / hw.rt_bw;
  t.comm3 = hw.t_bc + t.comm3_bits / hw.rt_bw;
  t.comm4 = hw.t_bc + t.comm4_bits / hw.rt_bw;
  return t;
}

const char* to_string(OpKind k) {
  for (const auto& on : kOpNames) {
    if (on.kind == k) return on.name;
  }
  return "?";
}

OpKind parse_op_kind(const std::string& name) {
  for (const auto& on : kOpNames) {
    if (name == on.name) return on.kind;
  }
  if (name == "relu") return OpKind::kReLU;
  if (name == "maxpool") return OpKind::kMaxPool;
  if (name == "avgpool") return OpKind::kAvgPool;
  if (name == "x2act") return OpKind::kX2act;
  if (name == "conv" || name == "dense") return OpKind::kConv;
  throw ContractError("unknown operator kind '" + name + "'");
}

std::optional<OpKind> op_kind_of(LayerKind k) {
  switch (k) {
    case LayerKind::kConv:
    case LayerKind::kDense: return OpKind::kConv;
    case LayerKind::kRelu: return OpKind::kReLU;
    case LayerKind::kX2act: return OpKind::kX2act;
    case LayerKind::kMaxPool: return OpKind::kMaxPool;
    case LayerKind::kAvgPool: return OpKind::kAvgPool;
    case LayerKind::kFlatten: return std::nullopt;
  }
  return std::nullopt;
}

LatencyEntry model_operator(OpKind kind, const LayerGeometry& g,
                            const HardwareProfile& hw) {
  const double n = double(g.fi) * double(g.fi) * double(g.ic);
  const double rate = hw.pp * hw.freq;
  LatencyEntry e;
  e.kind = kind;
  e.geom = g;
  e.rounds = model_rounds(kind);
  switch (kind) {
    case OpKind::kReLU:
    case OpKind::kMaxPool: {
      const OtFlowTerms t = model_ot_flow(g, hw);
      e.latency_s = t.cmp() + t.comm();
      if (kind == OpKind::kMaxPool) e.latency_s += 3.0 * hw.t_bc;
      e.comm_bits = t.bits();
      break;
    }
    case OpKind::kX2act: {
      const double cmp = 2.0 * n / rate;
      const double bits = 32.0 * n;
      e.latency_s = cmp + 2.0 * (hw.t_bc + bits / hw.rt_bw);
      e.comm_bits = 2.0 * bits;
      break;
    }
    case OpKind::kAvgPool:
      e.latency_s = 2.0 * n / rate;
      e.comm_bits = 0.0;
      break;
    case OpKind::kConv: {
      const double cmp = 3.0 * double(g.k) * double(g.k) * double(g.fo) *
                         double(g.fo) * double(g.ic) * double(g.oc) / rate;
      const double bits = 32.0 * n;
      e.latency_s = cmp + 2.0 * (hw.t_bc + bits / hw.rt_bw);
      e.comm_bits = 2.0 * bits;
      break;
    }
  }
  return e;
}

const LatencyEntry* LatencyTable::find(const std::string& layer_id,
                                       OpKind kind) const {
  for (const auto& e : entries) {
    if (e.layer_id == layer_id && e.kind == kind) return &e;
  }
  return nullptr;
}

double LatencyTable::total_latency() const {
  double total = 0;
  for (const auto& e : entries) total += e.latency_s;
  return total;
}

LayerGeometry layer_geometry(const LayerSpec& layer) {
  switch (layer.kind) {
    case LayerKind::kConv:
    case LayerKind::kDense:
      return LayerGeometry::from_conv(layer.conv);
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      return LayerGeometry::from_pool(layer.pool);
    case LayerKind::kRelu:
    case LayerKind::kX2act: {
      const Shape& s = layer.input_shape;
      if (s.size() == 3) return LayerGeometry::from_map(s);
      // A flat activation is modelled as a [n,1,1] map.
      return LayerGeometry::from_map({shape_size(s), 1, 1});
    }
    case LayerKind::kFlatten:
      break;
  }
  throw ContractError("layer '" + layer.id + "' has no modelled geometry");
}

LatencyTable build_lut(const GraphSpec& graph, const HardwareProfile& hw) {
  hw.validate();
  LatencyTable t;
  t.hw = hw;
  for (const LayerSpec& l : graph.layers) {
    if (!op_kind_of(l.kind)) continue;
    const LayerGeometry g = layer_geometry(l);
    std::vector<LayerKind> kinds = l.candidates;
    if (kinds.empty()) kinds.push_back(l.kind);
    for (LayerKind k : kinds) {
      LatencyEntry e = model_operator(*op_kind_of(k), g, hw);
      e.layer_id = l.id;
      t.entries.push_back(std::move(e));
    }
  }
  return t;
}

std::string lut_to_json(const LatencyTable& t) {
  json j;
  j["version"] = t.version;
  j["hardware"] = json::parse(t.hw.to_json());
  j["entries"] = json::array();
  for (const auto& e : t.entries) {
    j["entries"].push_back({{"layer_id", e.layer_id},
                            {"op_kind", to_string(e.kind)},
                            {"geom", geom_json(e.geom)},
                            {"latency_s", e.latency_s},
                            {"comm_bits", e.comm_bits},
                            {"rounds", e.rounds}});
  }
  return j.dump(2);
}

LatencyTable lut_from_json(const std::string& text) {
  LatencyTable t;
  try {
    const json j = json::parse(text);
    t.version = j.at("version").get<int>();
    if (t.version != 1) throw ConfigError("unsupported LUT version");
    t.hw = HardwareProfile::parse(j.at("hardware").dump());
    for (const json& ej : j.at("entries")) {
      LatencyEntry e;
      e.layer_id = ej.at("layer_id").get<std::string>();
      e.kind = parse_op_kind(ej.at("op_kind").get<std::string>());
      const json& g = ej.at("geom");
      e.geom.fi = g.at("FI").get<size_t>();
      e.geom.fo = g.at("FO").get<size_t>();
      e.geom.ic = g.at("IC").get<size_t>();
      e.geom.oc = g.at("OC").get<size_t>();
      e.geom.k = g.at("K").get<size_t>();
      e.latency_s = ej.at("latency_s").get<double>();
      e.comm_bits = ej.at("comm_bits").get<double>();
      e.rounds = ej.at("rounds").get<int>();
      t.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed latency table: ") + e.what());
  } catch (const ContractError& e) {
    throw ConfigError(std::string("malformed latency table: ") + e.what());
  }
  return t;
}

void export_lut(const LatencyTable& t, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << lut_to_json(t) << '\n';
}

LatencyTable import_lut(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return lut_from_json(ss.str());
}

ValidationReport validate_against_transcript(const LatencyEntry& entry,
                                             const TranscriptReport& r) {
  ValidationReport v;
  v.model_bits = entry.comm_bits;
  v.model_rounds = entry.rounds;
  v.ot_flow_bytes = r.ot_flow().bytes;
  v.comparison_batches = r.link(MsgType::kOtSetup).messages;
  const bool ot_op =
      entry.kind == OpKind::kReLU || entry.kind == OpKind::kMaxPool;
  v.measured_bits = 8.0 * double(ot_op ? r.ot_flow().bytes : r.link().bytes);
  if (v.model_bits > 0) {
    v.relative_error = std::abs(v.model_bits - v.measured_bits) / v.model_bits;
  }
  v.measured_rounds = int64_t(r.rounds);
  v.round_delta = v.measured_rounds - v.model_rounds;
  return v;
}

}  // namespace pi2pc
