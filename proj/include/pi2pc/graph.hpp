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

#include <string>
#include <vector>

#include "pi2pc/operators.hpp"
#include "pi2pc/ring.hpp"

namespace pi2pc {

enum class LayerKind { kConv, kDense, kRelu, kX2act, kMaxPool, kAvgPool, kFlatten };

const char* to_string(LayerKind k);
/// Throws ConfigError on an unknown name.
LayerKind parse_layer_kind(const std::string& name);
bool is_activation(LayerKind k);
bool is_pool(LayerKind k);

struct LayerSpec {
  std::string id;
  LayerKind kind = LayerKind::kFlatten;
  Shape input_shape;
  Shape output_shape;
  ConvGeometry conv;  // conv and dense (dense as 1x1 over [in,1,1])
  PoolGeometry pool;
  X2actParams x2act;
  bool bias = true;
  std::vector<LayerKind> candidates;  // empty unless the layer is gated

  bool has_weights() const {
    return kind == LayerKind::kConv || kind == LayerKind::kDense;
  }
  Shape weight_shape() const;
  Shape bias_shape() const { return {conv.out_channels}; }
};

/// Layer list with explicit shapes. Shapes are checked, never inferred.
struct GraphSpec {
  int version = 1;
  Shape input_shape;
  FixedPointConfig fp;
  std::vector<LayerSpec> layers;

  Shape output_shape() const;
  /// Throws ConfigError on broken shape chains, bad geometry or
  /// malformed candidate sets.
  void validate() const;
  /// Weight tensor shapes in file order: W then b per conv/dense layer.
  std::vector<Shape> parameter_shapes() const;
};

GraphSpec parse_graph(const std::string& json_text);
GraphSpec load_graph(const std::string& path);
std::string graph_to_json(const GraphSpec& g);

/// Concatenated tensor records in parameter_shapes() order.
std::vector<RingTensor> load_weights(const std::string& path,
                                     const GraphSpec& g);
void save_weights(const std::string& path,
                  const std::vector<RingTensor>& tensors);

/// [N,C,H,W] tensor file split into N [C,H,W] tensors.
std::vector<RingTensor> load_inputs(const std::string& path,
                                    const GraphSpec& g);
void save_inputs(const std::string& path, const std::vector<RingTensor>& xs);

}  // namespace pi2pc
