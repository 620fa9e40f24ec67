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

#include "pi2pc/graph.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

using nlohmann::json;

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::kConv, "conv"},       {LayerKind::kDense, "dense"},
    {LayerKind::kRelu, "relu"},       {LayerKind::kX2act, "x2act"},
    {LayerKind::kMaxPool, "maxpool"}, {LayerKind::kAvgPool, "avgpool"},
    {LayerKind::kFlatten, "flatten"},
};

Shape shape_from(const json& j, const std::string& what) {
  if (!j.is_array() || j.empty()) {
    throw ConfigError(what + " must be a non-empty array");
  }
  Shape s;
  for (const auto& d : j) {
    if (!d.is_number_unsigned() || d.get<size_t>() == 0) {
      throw ConfigError(what + " entries must be positive integers");
    }
    s.push_back(d.get<size_t>());
  }
  return s;
}

size_t positive(const json& j, const char* key, size_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number_unsigned()) {
    throw ConfigError(std::string("field '") + key +
                      "' must be a non-negative integer");
  }
  return j[key].get<size_t>();
}

double number(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j[key].is_number()) {
    throw ConfigError(std::string("field '") + key + "' must be a number");
  }
  return j[key].get<double>();
}

// Output shape implied by a layer's geometry given its declared input.
Shape derived_output(LayerSpec& l) {
  const Shape& in = l.input_shape;
  auto need_rank = [&](size_t r) {
    if (in.size() != r) {
      throw ConfigError("layer '" + l.id + "': " + to_string(l.kind) +
                        " expects a rank-" + std::to_string(r) + " input");
    }
  };
  switch (l.kind) {
    case LayerKind::kConv:
      need_rank(3);
      l.conv.in_channels = in[0];
      l.conv.in_h = in[1];
      l.conv.in_w = in[2];
      if (l.conv.out_channels == 0) {
        throw ConfigError("layer '" + l.id + "': out_channels must be > 0");
      }
      l.conv.validate();
      return l.conv.output_shape();
    case LayerKind::kDense:
      need_rank(1);
      l.conv.in_channels = in[0];
      l.conv.in_h = l.conv.in_w = 1;
      l.conv.kernel_h = l.conv.kernel_w = 1;
      l.conv.stride = 1;
      l.conv.pad = 0;
      if (l.conv.out_channels == 0) {
        throw ConfigError("layer '" + l.id + "': out_features must be > 0");
      }
      return {l.conv.out_channels};
    case LayerKind::kRelu:
    case LayerKind::kX2act:
      return in;
    case LayerKind::kMaxPool:
    case LayerKind::kAvgPool:
      need_rank(3);
      l.pool.channels = in[0];
      l.pool.in_h = in[1];
      l.pool.in_w = in[2];
      l.pool.validate();
      return l.pool.output_shape();
    case LayerKind::kFlatten:
      return {shape_size(in)};
  }
  return in;
}

void check_candidates(const LayerSpec& l) {
  if (l.candidates.empty()) return;
  const bool act = is_activation(l.kind), pool = is_pool(l.kind);
  if (!act && !pool) {
    throw ConfigError("layer '" + l.id + "': only activation and pooling "
                      "layers can be gated");
  }
  if (l.candidates.size() < 2) {
    throw ConfigError("layer '" + l.id + "': a gate needs at least two "
                      "candidates");
  }
  bool has_self = false;
  for (LayerKind c : l.candidates) {
    if ((act && !is_activation(c)) || (pool && !is_pool(c))) {
      throw ConfigError("layer '" + l.id + "': candidate " +
                        std::string(to_string(c)) + " does not fit the gate");
    }
    has_self |= c == l.kind;
  }
  if (!has_self) {
    throw ConfigError("layer '" + l.id + "': selected kind is not among the "
                      "candidates");
  }
}

std::vector<RingTensor> read_all(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  std::vector<RingTensor> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    out.push_back(read_tensor(is));
  }
  return out;
}

}  // namespace

const char* to_string(LayerKind k) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == k) return kn.name;
  }
  return "?";
}

LayerKind parse_layer_kind(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  throw ConfigError("unknown layer kind '" + name + "'");
}

bool is_activation(LayerKind k) {
  return k == LayerKind::kRelu || k == LayerKind::kX2act;
}

bool is_pool(LayerKind k) {
  return k == LayerKind::kMaxPool || k == LayerKind::kAvgPool;
}

Shape LayerSpec::weight_shape() const {
  if (kind == LayerKind::kDense) return {conv.out_channels, conv.in_channels};
  return conv.weight_shape();
}

Shape GraphSpec::output_shape() const {
  return layers.empty() ? input_shape : layers.back().output_shape;
}

void GraphSpec::validate() const {
  try {
    fp.validate();
  } catch (const ContractError& e) {
    throw ConfigError(std::string("fixed-point config: ") + e.what());
  }
  if (input_shape.size() != 3) {
    throw ConfigError("graph input_shape must be [C,H,W]");
  }
  Shape cur = input_shape;
  for (const LayerSpec& layer : layers) {
    LayerSpec l = layer;
    if (l.input_shape != cur) {
      throw ConfigError("layer '" + l.id + "': input_shape " +
                        shape_string(l.input_shape) +
                        " does not match previous output " +
                        shape_string(cur));
    }
    Shape out;
    try {
      out = derived_output(l);
    } catch (const ContractError& e) {
      throw ConfigError("layer '" + l.id + "': " + e.what());
    }
    if (out != l.output_shape) {
      throw ConfigError("layer '" + l.id + "': output_shape " +
                        shape_string(l.output_shape) + " but geometry gives " +
                        shape_string(out));
    }
    if (l.kind == LayerKind::kConv || l.kind == LayerKind::kDense) {
      if (!(l.conv == layer.conv)) {
        throw ConfigError("layer '" + l.id + "': geometry inconsistent");
      }
    }
    check_candidates(l);
    if (l.kind == LayerKind::kX2act) {
      try {
        l.x2act.validate();
      } catch (const ContractError& e) {
        throw ConfigError("layer '" + l.id + "': " + e.what());
      }
    }
    cur = l.output_shape;
  }
}

std::vector<Shape> GraphSpec::parameter_shapes() const {
  std::vector<Shape> out;
  for (const LayerSpec& l : layers) {
    if (!l.has_weights()) continue;
    out.push_back(l.weight_shape());
    if (l.bias) out.push_back(l.bias_shape());
  }
  return out;
}

GraphSpec parse_graph(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("graph is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("graph must be a JSON object");
  GraphSpec g;
  g.version = int(positive(j, "version", 1));
  if (g.version != 1) throw ConfigError("unsupported graph version");
  if (!j.contains("input_shape")) throw ConfigError("graph needs input_shape");
  g.input_shape = shape_from(j["input_shape"], "input_shape");
  if (j.contains("fp")) {
    g.fp.total_bits = int(positive(j["fp"], "total_bits", 32));
    g.fp.frac_bits = int(positive(j["fp"], "frac_bits", 12));
  }
  if (!j.contains("layers") || !j["layers"].is_array()) {
    throw ConfigError("graph needs a layers array");
  }
  for (const json& lj : j["layers"]) {
    if (!lj.is_object()) throw ConfigError("layer must be an object");
    LayerSpec l;
    l.id = lj.value("id", "layer" + std::to_string(g.layers.size()));
    if (!lj.contains("kind") || !lj["kind"].is_string()) {
      throw ConfigError("layer '" + l.id + "' needs a kind");
    }
    l.kind = parse_layer_kind(lj["kind"].get<std::string>());
    if (!lj.contains("input_shape") || !lj.contains("output_shape")) {
      throw ConfigError("layer '" + l.id +
                        "' needs explicit input_shape and output_shape");
    }
    l.input_shape = shape_from(lj["input_shape"], l.id + ".input_shape");
    l.output_shape = shape_from(lj["output_shape"], l.id + ".output_shape");
    l.bias = lj.value("bias", true);
    switch (l.kind) {
      case LayerKind::kConv: {
        l.conv.out_channels = positive(lj, "out_channels", 0);
        const size_t k = positive(lj, "kernel", 1);
        l.conv.kernel_h = positive(lj, "kernel_h", k);
        l.conv.kernel_w = positive(lj, "kernel_w", k);
        l.conv.stride = positive(lj, "stride", 1);
        l.conv.pad = positive(lj, "pad", 0);
        break;
      }
      case LayerKind::kDense:
        l.conv.out_channels = positive(lj, "out_features", 0);
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool: {
        const size_t k = positive(lj, "kernel", 2);
        const size_t s = positive(lj, "stride", k);
        l.pool.kernel_h = positive(lj, "kernel_h", k);
        l.pool.kernel_w = positive(lj, "kernel_w", k);
        l.pool.stride_h = positive(lj, "stride_h", s);
        l.pool.stride_w = positive(lj, "stride_w", s);
        break;
      }
      case LayerKind::kX2act:
        l.x2act.w1 = number(lj, "w1", 0.0);
        l.x2act.w2 = number(lj, "w2", 1.0);
        l.x2act.b = number(lj, "b", 0.0);
        l.x2act.c = number(lj, "c", 0.1);
        l.x2act.n_x = positive(lj, "n_x", shape_size(l.input_shape));
        break;
      default:
        break;
    }
    if (lj.contains("candidates")) {
      if (!lj["candidates"].is_array()) {
        throw ConfigError("layer '" + l.id + "': candidates must be a list");
      }
      for (const auto& c : lj["candidates"]) {
        if (!c.is_string()) throw ConfigError("candidate must be a string");
        l.candidates.push_back(parse_layer_kind(c.get<std::string>()));
      }
    }
    // Fill derived geometry fields; validate() re-checks everything.
    try {
      if (l.kind == LayerKind::kConv && l.input_shape.size() == 3) {
        l.conv.in_channels = l.input_shape[0];
        l.conv.in_h = l.input_shape[1];
        l.conv.in_w = l.input_shape[2];
      } else if (l.kind == LayerKind::kDense) {
        l.conv.in_channels = shape_size(l.input_shape);
      } else if (is_pool(l.kind) && l.input_shape.size() == 3) {
        l.pool.channels = l.input_shape[0];
        l.pool.in_h = l.input_shape[1];
        l.pool.in_w = l.input_shape[2];
      }
    } catch (const ContractError& e) {
      throw ConfigError(e.what());
    }
    g.layers.push_back(std::move(l));
  }
  g.validate();
  return g;
}

GraphSpec load_graph(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open graph " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_graph(ss.str());
}

std::string graph_to_json(const GraphSpec& g) {
  json j;
  j["version"] = g.version;
  j["input_shape"] = g.input_shape;
  j["fp"] = {{"total_bits", g.fp.total_bits}, {"frac_bits", g.fp.frac_bits}};
  j["layers"] = json::array();
  for (const LayerSpec& l : g.layers) {
    json lj;
    lj["id"] = l.id;
    lj["kind"] = to_string(l.kind);
    lj["input_shape"] = l.input_shape;
    lj["output_shape"] = l.output_shape;
    switch (l.kind) {
      case LayerKind::kConv:
        lj["out_channels"] = l.conv.out_channels;
        lj["kernel_h"] = l.conv.kernel_h;
        lj["kernel_w"] = l.conv.kernel_w;
        lj["stride"] = l.conv.stride;
        lj["pad"] = l.conv.pad;
        lj["bias"] = l.bias;
        break;
      case LayerKind::kDense:
        lj["out_features"] = l.conv.out_channels;
        lj["bias"] = l.bias;
        break;
      case LayerKind::kMaxPool:
      case LayerKind::kAvgPool:
        lj["kernel_h"] = l.pool.kernel_h;
        lj["kernel_w"] = l.pool.kernel_w;
        lj["stride_h"] = l.pool.stride_h;
        lj["stride_w"] = l.pool.stride_w;
        break;
      case LayerKind::kX2act:
        lj["w1"] = l.x2act.w1;
        lj["w2"] = l.x2act.w2;
        lj["b"] = l.x2act.b;
        lj["c"] = l.x2act.c;
        lj["n_x"] = l.x2act.n_x;
        break;
      default:
        break;
    }
    if (!l.candidates.empty()) {
      json c = json::array();
      for (LayerKind k : l.candidates) c.push_back(to_string(k));
      lj["candidates"] = c;
    }
    j["layers"].push_back(lj);
  }
  return j.dump(2);
}

std::vector<RingTensor> load_weights(const std::string& path,
                                     const GraphSpec& g) {
  auto tensors = read_all(path);
  const auto shapes = g.parameter_shapes();
  if (tensors.size() != shapes.size()) {
    throw ConfigError("weights file holds " + std::to_string(tensors.size()) +
                      " tensors, graph needs " + std::to_string(shapes.size()));
  }
  for (size_t i = 0; i < shapes.size(); ++i) {
    if (tensors[i].shape() != shapes[i]) {
      throw ConfigError("weight tensor " + std::to_string(i) + " has shape " +
                        shape_string(tensors[i].shape()) + ", expected " +
                        shape_string(shapes[i]));
    }
    if (!(tensors[i].fp() == g.fp)) {
      throw ConfigError("weight tensor " + std::to_string(i) +
                        " uses a different fixed-point format");
    }
  }
  return tensors;
}

void save_weights(const std::string& path,
                  const std::vector<RingTensor>& tensors) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path);
  for (const auto& t : tensors) write_tensor(os, t);
}

std::vector<RingTensor> load_inputs(const std::string& path,
                                    const GraphSpec& g) {
  auto tensors = read_all(path);
  if (tensors.size() != 1) {
    throw ConfigError("input file must hold exactly one tensor");
  }
  const RingTensor& t = tensors[0];
  if (!(t.fp() == g.fp)) {
    throw ConfigError("input uses a different fixed-point format");
  }
  if (t.shape() == g.input_shape) return tensors;
  if (t.rank() != 4 ||
      Shape(t.shape().begin() + 1, t.shape().end()) != g.input_shape) {
    throw ConfigError("input shape " + shape_string(t.shape()) +
                      " does not match graph input " +
                      shape_string(g.input_shape));
  }
  const size_t n = t.shape()[0], per = shape_size(g.input_shape);
  std::vector<RingTensor> out;
  for (size_t i = 0; i < n; ++i) {
    const auto w = t.words().subspan(i * per, per);
    out.emplace_back(g.input_shape, std::vector<Word>(w.begin(), w.end()),
                     g.fp);
  }
  return out;
}

void save_inputs(const std::string& path, const std::vector<RingTensor>& xs) {
  require(!xs.empty(), "save_inputs: empty batch");
  Shape shape{xs.size()};
  shape.insert(shape.end(), xs[0].shape().begin(), xs[0].shape().end());
  std::vector<Word> words;
  for (const auto& x : xs) {
    require(x.shape() == xs[0].shape(), "save_inputs: ragged batch");
    words.insert(words.end(), x.words().begin(), x.words().end());
  }
  save_tensor(path, RingTensor(shape, std::move(words), xs[0].fp()));
}

}  // namespace pi2pc
