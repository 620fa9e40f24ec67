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
#include <vector>

#include "pi2pc/graph.hpp"

namespace pi2pc {

/// Small CNN used by the examples and the end-to-end checks:
/// [3,8,8] -> conv 3x3 (4) -> x2act -> avgpool 2x2 -> conv 3x3 (8) -> relu
/// -> maxpool 2x2 -> flatten -> dense (10). Activation and pooling sites
/// are gated over {relu, x2act} and {maxpool, avgpool}.
GraphSpec reference_cnn();

/// Weights uniform in [-scale, scale], encoded at the graph's format.
std::vector<RingTensor> random_weights(const GraphSpec& g, uint64_t seed,
                                       double scale = 0.2);
/// Inputs uniform in [-1, 1].
std::vector<RingTensor> random_inputs(const GraphSpec& g, size_t count,
                                      uint64_t seed);

}  // namespace pi2pc
