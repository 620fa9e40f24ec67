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

#include "pi2pc/operators.hpp"

#include <cmath>

#include "pi2pc/beaver.hpp"
#include "pi2pc/compare.hpp"
#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

// Kh*Kw tensors of the output shape; slice k holds window element
// (k / Kw, k % Kw) of every output position.
std::vector<RingTensor> window_slices(const RingTensor& x,
                                      const PoolGeometry& g) {
  require(x.shape() == g.input_shape(),
          "pool: input " + shape_string(x.shape()) + " does not match " +
              shape_string(g.input_shape()));
  const size_t oh = g.out_h(), ow = g.out_w();
  std::vector<RingTensor> out(g.window(), RingTensor(g.output_shape(), x.fp()));
  for (size_t c = 0; c < g.channels; ++c) {
    for (size_t i = 0; i < oh; ++i) {
      for (size_t j = 0; j < ow; ++j) {
        const size_t o = (c * oh + i) * ow + j;
        for (size_t kh = 0; kh < g.kernel_h; ++kh) {
          for (size_t kw = 0; kw < g.kernel_w; ++kw) {
            const size_t src = (c * g.in_h + i * g.stride_h + kh) * g.in_w +
                               j * g.stride_w + kw;
            out[kh * g.kernel_w + kw].set(o, x[src]);
          }
        }
      }
    }
  }
  return out;
}

RingTensor window_sum(const RingTensor& x, const PoolGeometry& g) {
  auto slices = window_slices(x, g);
  RingTensor sum = slices[0];
  for (size_t k = 1; k < slices.size(); ++k) sum = sum + slices[k];
  return sum;
}

void add_channel_bias(RingTensor& y, const RingTensor& bias) {
  require(bias.size() == y.shape()[0], "bias length must equal channels");
  const size_t plane = y.size() / bias.size();
  for (size_t c = 0; c < bias.size(); ++c) {
    for (size_t i = 0; i < plane; ++i) {
      y.set(c * plane + i, y[c * plane + i] + bias[c]);
    }
  }
}

int64_t encode_signed(double v, const FixedPointConfig& fp) {
  return to_signed(fp_encode(v, fp), fp.total_bits);
}

int64_t avg_coeff(const PoolGeometry& g, const FixedPointConfig& fp) {
  return encode_signed(1.0 / double(g.window()), fp);
}

struct X2actCoeffs {
  int64_t quad, lin, bias;
};

X2actCoeffs x2act_coeffs(const X2actParams& p, const FixedPointConfig& fp) {
  p.validate();
  return {encode_signed(p.quadratic(), fp),
          encode_signed(p.w2, fp) * (int64_t{1} << fp.frac_bits),
          encode_signed(p.b, fp)};
}

ShareTensor reshape(const ShareTensor& x, Shape shape) {
  return {x.party, x.values.reshaped(std::move(shape))};
}

}  // namespace

double X2actParams::quadratic() const {
  return c / std::sqrt(double(n_x)) * w1;
}

void X2actParams::validate() const {
  if (n_x == 0) throw ContractError("x2act: n_x must be positive");
  if (!std::isfinite(w1) || !std::isfinite(w2) || !std::isfinite(b) ||
      !std::isfinite(c)) {
    throw ContractError("x2act: coefficients must be finite");
  }
}

size_t PoolGeometry::out_h() const { return (in_h - kernel_h) / stride_h + 1; }
size_t PoolGeometry::out_w() const { return (in_w - kernel_w) / stride_w + 1; }

void PoolGeometry::validate() const {
  if (channels == 0 || kernel_h == 0 || kernel_w == 0 || stride_h == 0 ||
      stride_w == 0) {
    throw ContractError("pool: zero-sized dimension");
  }
  if (kernel_h > in_h || kernel_w > in_w) {
    throw ContractError("pool: window larger than input");
  }
}

LayerGeometry LayerGeometry::from_conv(const ConvGeometry& g) {
  LayerGeometry l;
  l.fi = g.in_h;
  l.fo = g.out_h();
  l.ic = g.in_channels;
  l.oc = g.out_channels;
  l.k = g.kernel_h;
  l.stride = g.stride;
  return l;
}

LayerGeometry LayerGeometry::from_pool(const PoolGeometry& g) {
  LayerGeometry l;
  l.fi = g.in_h;
  l.fo = g.out_h();
  l.ic = l.oc = g.channels;
  l.k = g.kernel_h;
  l.stride = g.stride_h;
  l.pool_kh = g.kernel_h;
  l.pool_kw = g.kernel_w;
  l.pool_sh = g.stride_h;
  l.pool_sw = g.stride_w;
  return l;
}

LayerGeometry LayerGeometry::from_map(const Shape& chw) {
  require(chw.size() == 3, "feature map must be [C,H,W]");
  LayerGeometry l;
  l.fi = l.fo = chw[1];
  l.ic = l.oc = chw[0];
  return l;
}

ConvGeometry dense_geometry(size_t in, size_t out) {
  ConvGeometry g;
  g.in_channels = in;
  g.out_channels = out;
  return g;
}

ShareTensor conv2pc(const ShareTensor& x, const ShareTensor& w,
                    const ShareTensor* bias, const ConvGeometry& g,
                    Session& s) {
  const auto op = BilinearOp::convolution(g);
  BeaverTriple t = s.corr.take_triple(op);
  ShareTensor y = mul_2pc(x, w, t, s.channel);
  TruncationPair tr = s.corr.take_truncation(y.size(), x.fp().frac_bits);
  y = truncate_2pc(y, tr, s.channel);
  if (bias != nullptr) add_channel_bias(y.values, bias->values);
  return y;
}

ShareTensor dense2pc(const ShareTensor& x, const ShareTensor& w,
                     const ShareTensor* bias, Session& s) {
  require(w.shape().size() == 2 && w.shape()[1] == x.size(),
          "dense: weight must be [out, in] with in = input size");
  const size_t in = w.shape()[1], out = w.shape()[0];
  ShareTensor y = conv2pc(reshape(x, {in, 1, 1}), reshape(w, {out, in, 1, 1}),
                          bias, dense_geometry(in, out), s);
  return reshape(y, {out});
}

ShareTensor relu2pc(const ShareTensor& x, Session& s) {
  const BitShare bit = drelu_sign(x, s);
  const ShareTensor a = bit_to_arith(bit, s);
  BeaverTriple t = s.corr.take_triple(BilinearOp::elementwise(x.shape()));
  return mul_2pc(a, x, t, s.channel);
}

ShareTensor maxpool2pc(const ShareTensor& x, const PoolGeometry& g,
                       Session& s) {
  g.validate();
  const auto slices = window_slices(x.values, g);
  ShareTensor m{x.party, slices[0]};
  for (size_t k = 1; k < slices.size(); ++k) {
    const ShareTensor d{x.party, slices[k] - m.values};
    const ShareTensor a = bit_to_arith(drelu_sign(d, s), s);
    BeaverTriple t = s.corr.take_triple(BilinearOp::elementwise(d.shape()));
    m = m + mul_2pc(a, d, t, s.channel);
  }
  return m;
}

ShareTensor avgpool2pc(const ShareTensor& x, const PoolGeometry& g,
                       Session& s) {
  g.validate();
  const ShareTensor sum{x.party, window_sum(x.values, g)};
  TruncationPair tr = s.corr.take_truncation(sum.size(), x.fp().frac_bits);
  return rescale_2pc({{&sum, nullptr}}, tr, s.channel);
}

ShareTensor x2act2pc(const ShareTensor& x, const X2actParams& p, Session& s) {
  const FixedPointConfig& fp = x.fp();
  const X2actCoeffs k = x2act_coeffs(p, fp);
  SquarePair pair = s.corr.take_square(x.shape());
  TruncationPair tr = s.corr.take_truncation(x.size(), 2 * fp.frac_bits);
  require(tr.coeffs == std::vector<int64_t>({k.quad, k.lin}),
          "x2act: truncation pair issued for other coefficients");
  const SquareOutcome sq = square_2pc_opened(x, pair, s.channel);
  const RingTensor c_x =
      add_scalar(sq.opened, Word(1) << (fp.total_bits - 2));
  ShareTensor y =
      rescale_2pc({{&sq.square, nullptr}, {&x, &c_x}}, tr, s.channel);
  RingTensor b(y.shape(), fp);
  for (size_t i = 0; i < b.size(); ++i) {
    b.set(i, from_signed(k.bias, fp.total_bits));
  }
  return add_public(y, b);
}

void deal_conv(Dealer& d, StreamPair& out, const ConvGeometry& g, int frac) {
  push(out, d.triple(BilinearOp::convolution(g)));
  push(out, d.truncation(shape_size(g.output_shape()), frac));
}

void deal_dense(Dealer& d, StreamPair& out, size_t in, size_t outputs,
                int frac) {
  deal_conv(d, out, dense_geometry(in, outputs), frac);
}

void deal_relu(Dealer& d, StreamPair& out, const Shape& shape) {
  deal_drelu(d, out, shape_size(shape));
  deal_bit_to_arith(d, out, shape);
  push(out, d.triple(BilinearOp::elementwise(shape)));
}

void deal_maxpool(Dealer& d, StreamPair& out, const PoolGeometry& g) {
  g.validate();
  for (size_t k = 1; k < g.window(); ++k) deal_relu(d, out, g.output_shape());
}

void deal_avgpool(Dealer& d, StreamPair& out, const PoolGeometry& g,
                  int frac) {
  FixedPointConfig fp;
  fp.total_bits = d.ring_bits();
  fp.frac_bits = frac;
  push(out, d.truncation(shape_size(g.output_shape()), frac,
                         avg_coeff(g, fp)));
}

void deal_x2act(Dealer& d, StreamPair& out, const Shape& shape,
                const X2actParams& p, const FixedPointConfig& fp) {
  const X2actCoeffs k = x2act_coeffs(p, fp);
  auto [pair, trunc] =
      d.square_affine(shape, 2 * fp.frac_bits, k.quad, k.lin);
  push(out, std::move(pair));
  push(out, std::move(trunc));
}

RingTensor conv_plain(const RingTensor& x, const RingTensor& w,
                      const RingTensor* bias, const ConvGeometry& g) {
  RingTensor y = shift_right_arith(conv2d(x, w, g), x.fp().frac_bits);
  if (bias != nullptr) add_channel_bias(y, *bias);
  return y;
}

RingTensor dense_plain(const RingTensor& x, const RingTensor& w,
                       const RingTensor* bias) {
  require(w.rank() == 2 && w.shape()[1] == x.size(),
          "dense: weight must be [out, in] with in = input size");
  const size_t in = w.shape()[1], out = w.shape()[0];
  return conv_plain(x.reshaped({in, 1, 1}), w.reshaped({out, in, 1, 1}), bias,
                    dense_geometry(in, out))
      .reshaped({out});
}

RingTensor relu_plain(const RingTensor& x) {
  RingTensor y = x;
  for (size_t i = 0; i < y.size(); ++i) {
    if (y.signed_at(i) < 0) y.set(i, 0);
  }
  return y;
}

RingTensor maxpool_plain(const RingTensor& x, const PoolGeometry& g) {
  g.validate();
  const auto slices = window_slices(x, g);
  RingTensor m = slices[0];
  for (size_t k = 1; k < slices.size(); ++k) {
    for (size_t i = 0; i < m.size(); ++i) {
      if (slices[k].signed_at(i) > m.signed_at(i)) m.set(i, slices[k][i]);
    }
  }
  return m;
}

RingTensor avgpool_plain(const RingTensor& x, const PoolGeometry& g) {
  g.validate();
  const int64_t c = avg_coeff(g, x.fp());
  RingTensor sum = window_sum(x, g);
  for (size_t i = 0; i < sum.size(); ++i) {
    sum.set(i, from_signed((c * sum.signed_at(i)) >> x.fp().frac_bits,
                           x.bits()));
  }
  return sum;
}

RingTensor x2act_plain(const RingTensor& x, const X2actParams& p) {
  const FixedPointConfig& fp = x.fp();
  const X2actCoeffs k = x2act_coeffs(p, fp);
  RingTensor y(x.shape(), fp);
  for (size_t i = 0; i < x.size(); ++i) {
    const __int128 v = x.signed_at(i);
    const __int128 acc = __int128(k.quad) * v * v + __int128(k.lin) * v;
    const int64_t r = int64_t(acc >> (2 * fp.frac_bits)) + k.bias;
    y.set(i, from_signed(r, fp.total_bits));
  }
  return y;
}

FusedConv fuse_batchnorm(const Eigen::MatrixXd& weight,
                         const Eigen::VectorXd& bias, const BatchNorm& bn) {
  const Eigen::Index oc = weight.rows();
  require(bias.size() == oc && bn.gamma.size() == oc && bn.beta.size() == oc &&
              bn.mean.size() == oc && bn.var.size() == oc,
          "fuse_batchnorm: per-channel sizes disagree");
  require((bn.var.array() > 0.0).all(),
          "fuse_batchnorm: variance must be positive");
  const Eigen::ArrayXd scale =
      bn.gamma.array() / (bn.var.array() + bn.eps).sqrt();
  FusedConv out;
  out.weight = scale.matrix().asDiagonal() * weight;
  out.bias = ((bias - bn.mean).array() * scale + bn.beta.array()).matrix();
  return out;
}

}  // namespace pi2pc
