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

#include <Eigen/Core>

#include <cstddef>
#include <vector>

#include "pi2pc/correlated.hpp"
#include "pi2pc/ring.hpp"
#include "pi2pc/session.hpp"
#include "pi2pc/sharing.hpp"

namespace pi2pc {

/// Public coefficients of the trainable quadratic activation
///   delta(x) = (c / sqrt(n_x)) * w1 * x^2 + w2 * x + b.
struct X2actParams {
  double w1 = 0.0;
  double w2 = 1.0;
  double b = 0.0;
  double c = 0.1;
  size_t n_x = 1;  // elements in the feature map

  double quadratic() const;
  void validate() const;
};

/// Pooling window over a [C,H,W] map; no padding.
struct PoolGeometry {
  size_t channels = 1;
  size_t in_h = 1;
  size_t in_w = 1;
  size_t kernel_h = 2;
  size_t kernel_w = 2;
  size_t stride_h = 2;
  size_t stride_w = 2;

  size_t out_h() const;
  size_t out_w() const;
  size_t window() const { return kernel_h * kernel_w; }
  Shape input_shape() const { return {channels, in_h, in_w}; }
  Shape output_shape() const { return {channels, out_h(), out_w()}; }
  void validate() const;
};

/// Square-map shorthand used by the latency model.
struct LayerGeometry {
  size_t fi = 1;  // input spatial size
  size_t fo = 1;  // output spatial size
  size_t ic = 1;
  size_t oc = 1;
  size_t k = 1;
  size_t stride = 1;
  size_t pool_kh = 2, pool_kw = 2, pool_sh = 2, pool_sw = 2;

  static LayerGeometry from_conv(const ConvGeometry& g);
  static LayerGeometry from_pool(const PoolGeometry& g);
  /// Activation over a [C,H,W] map.
  static LayerGeometry from_map(const Shape& chw);

  bool operator==(const LayerGeometry&) const = default;
};

/// Dense layer as a 1x1 convolution over a [in,1,1] map.
ConvGeometry dense_geometry(size_t in, size_t out);

// Secure layer operators. Every call consumes, in order, exactly the
// correlated randomness the matching deal_* function issues.

/// Beaver convolution, rescale by f, then per-channel bias (may be null).
ShareTensor conv2pc(const ShareTensor& x, const ShareTensor& w,
                    const ShareTensor* bias, const ConvGeometry& g,
                    Session& s);
/// x: [in] (any shape with `in` elements), w: [out,in], bias: [out].
ShareTensor dense2pc(const ShareTensor& x, const ShareTensor& w,
                     const ShareTensor* bias, Session& s);
ShareTensor relu2pc(const ShareTensor& x, Session& s);
/// Row-major sequential reduction, one comparison stage per extra
/// window element.
ShareTensor maxpool2pc(const ShareTensor& x, const PoolGeometry& g,
                       Session& s);
/// Local window sum, then one scaled rescale by fp(1/window).
ShareTensor avgpool2pc(const ShareTensor& x, const PoolGeometry& g,
                       Session& s);
/// Square, then one fused rescale of q*x^2 + w2*x, then + b. Requires
/// |x| < 2^((w-2)/2 - f).
ShareTensor x2act2pc(const ShareTensor& x, const X2actParams& p, Session& s);

void deal_conv(Dealer& d, StreamPair& out, const ConvGeometry& g, int frac);
void deal_dense(Dealer& d, StreamPair& out, size_t in, size_t outputs,
                int frac);
void deal_relu(Dealer& d, StreamPair& out, const Shape& shape);
void deal_maxpool(Dealer& d, StreamPair& out, const PoolGeometry& g);
void deal_avgpool(Dealer& d, StreamPair& out, const PoolGeometry& g,
                  int frac);
void deal_x2act(Dealer& d, StreamPair& out, const Shape& shape,
                const X2actParams& p, const FixedPointConfig& fp);

// Plaintext fixed-point references with the secure rounding schedule.

RingTensor conv_plain(const RingTensor& x, const RingTensor& w,
                      const RingTensor* bias, const ConvGeometry& g);
RingTensor dense_plain(const RingTensor& x, const RingTensor& w,
                       const RingTensor* bias);
RingTensor relu_plain(const RingTensor& x);
RingTensor maxpool_plain(const RingTensor& x, const PoolGeometry& g);
RingTensor avgpool_plain(const RingTensor& x, const PoolGeometry& g);
RingTensor x2act_plain(const RingTensor& x, const X2actParams& p);

/// Batch-norm statistics per output channel.
struct BatchNorm {
  Eigen::VectorXd gamma, beta, mean, var;
  double eps = 0.0;
};

struct FusedConv {
  Eigen::MatrixXd weight;  // [OC, C*KH*KW]
  Eigen::VectorXd bias;    // [OC]
};

/// Folds y = gamma * (conv(x) + b - mean) / sqrt(var + eps) + beta into the
/// convolution. Throws ContractError on non-positive variance.
FusedConv fuse_batchnorm(const Eigen::MatrixXd& weight,
                         const Eigen::VectorXd& bias, const BatchNorm& bn);

}  // namespace pi2pc
