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

#include "pi2pc/model_zoo.hpp"

#include <random>

#include "pi2pc/random.hpp"

namespace pi2pc {
namespace {

constexpr char kReferenceCnn[] = R"({
  "version": 1,
  "input_shape": [3, 8, 8],
  "fp": {"total_bits": 32, "frac_bits": 12},
  "layers": [
    {"id": "conv1", "kind": "conv", "input_shape": [3, 8, 8],
     "output_shape": [4, 8, 8], "out_channels": 4, "kernel": 3, "pad": 1},
    {"id": "act1", "kind": "x2act", "input_shape": [4, 8, 8],
     "output_shape": [4, 8, 8], "w1": 0.5, "w2": 1.0, "b": 0.1, "c": 0.1,
     "candidates": ["relu", "x2act"]},
    {"id": "pool1", "kind": "avgpool", "input_shape": [4, 8, 8],
     "output_shape": [4, 4, 4], "kernel": 2, "stride": 2,
     "candidates": ["maxpool", "avgpool"]},
    {"id": "conv2", "kind": "conv", "input_shape": [4, 4, 4],
     "output_shape": [8, 4, 4], "out_channels": 8, "kernel": 3, "pad": 1},
    {"id": "act2", "kind": "relu", "input_shape": [8, 4, 4],
     "output_shape": [8, 4, 4], "candidates": ["relu", "x2act"]},
    {"id": "pool2", "kind": "maxpool", "input_shape": [8, 4, 4],
     "output_shape": [8, 2, 2], "kernel": 2, "stride": 2,
     "candidates": ["maxpool", "avgpool"]},
    {"id": "flatten", "kind": "flatten", "input_shape": [8, 2, 2],
     "output_shape": [32]},
    {"id": "fc", "kind": "dense", "input_shape": [32], "output_shape": [10],
     "out_features": 10}
  ]
})";

RingTensor uniform_tensor(const Shape& shape, double lo, double hi,
                          const FixedPointConfig& fp, Prg& rng) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> v(shape_size(shape));
  for (double& x : v) x = dist(rng);
  return fp_encode(v, shape, fp);
}

}  // namespace

GraphSpec reference_cnn() { return parse_graph(kReferenceCnn); }

std::vector<RingTensor> random_weights(const GraphSpec& g, uint64_t seed,
                                       double scale) {
  Prg rng = Prg(seed).derive(0x77);
  std::vector<RingTensor> out;
  for (const Shape& s : g.parameter_shapes()) {
    out.push_back(uniform_tensor(s, -scale, scale, g.fp, rng));
  }
  return out;
}

std::vector<RingTensor> random_inputs(const GraphSpec& g, size_t count,
                                      uint64_t seed) {
  Prg rng = Prg(seed).derive(0x1e);
  std::vector<RingTensor> out;
  for (size_t i = 0; i < count; ++i) {
    out.push_back(uniform_tensor(g.input_shape, -1.0, 1.0, g.fp, rng));
  }
  return out;
}

}  // namespace pi2pc
