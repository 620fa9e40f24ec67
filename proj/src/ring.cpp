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

#include "pi2pc/ring.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

using RowMatrix =
    Eigen::Matrix<Word, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void require_same(const RingTensor& a, const RingTensor& b, const char* op) {
  if (a.shape() != b.shape() || a.bits() != b.bits()) {
    throw ContractError(std::string(op) + ": shape mismatch " +
                        shape_string(a.shape()) + " vs " +
                        shape_string(b.shape()));
  }
}

RingTensor with_array(const RingTensor& like, const RingTensor::Array& a) {
  RingTensor out(like.shape(), like.fp());
  out.array() = a;
  return out.reduce();
}

void write_u32(std::ostream& os, uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = char(uint8_t(v >> (8 * i)));
  os.write(b, 4);
}

uint32_t read_u32(std::istream& is) {
  unsigned char b[4];
  if (!is.read(reinterpret_cast<char*>(b), 4)) {
    throw ConfigError("tensor file truncated");
  }
  return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
         uint32_t(b[3]) << 24;
}

}  // namespace

void FixedPointConfig::validate() const {
  if (total_bits < 2 || total_bits > 32) {
    throw ContractError("ring width must be in [2, 32]");
  }
  if (frac_bits <= 0 || frac_bits >= total_bits - 2) {
    throw ContractError("fractional bits must satisfy 0 < f < total_bits - 2");
  }
}

Word FixedPointConfig::mask() const {
  return total_bits >= 32 ? ~Word{0} : Word((uint64_t{1} << total_bits) - 1);
}

size_t shape_size(const Shape& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

int64_t to_signed(Word w, int bits) {
  const uint64_t modulus = uint64_t{1} << bits;
  const uint64_t v = w & (modulus - 1);
  return v >= modulus / 2 ? int64_t(v) - int64_t(modulus) : int64_t(v);
}

Word from_signed(int64_t v, int bits) {
  const uint64_t modulus = uint64_t{1} << bits;
  return Word(uint64_t(v) & (modulus - 1));
}

RingTensor::RingTensor(Shape shape, FixedPointConfig fp)
    : shape_(std::move(shape)), data_(shape_size(shape_), 0), fp_(fp) {}

RingTensor::RingTensor(Shape shape, std::vector<Word> words,
                       FixedPointConfig fp)
    : shape_(std::move(shape)), data_(std::move(words)), fp_(fp) {
  require(data_.size() == shape_size(shape_),
          "RingTensor: data length does not match shape " +
              shape_string(shape_));
  reduce();
}

RingTensor RingTensor::from_signed(Shape shape,
                                   std::span<const int64_t> values,
                                   FixedPointConfig fp) {
  RingTensor t(std::move(shape), fp);
  require(values.size() == t.size(), "from_signed: length mismatch");
  for (size_t i = 0; i < values.size(); ++i) {
    t.data_[i] = pi2pc::from_signed(values[i], fp.total_bits);
  }
  return t;
}

RingTensor& RingTensor::reduce() {
  if (bits() < 32) {
    const Word m = mask();
    array() = array().unaryExpr([m](Word v) { return Word(v & m); });
  }
  return *this;
}

RingTensor RingTensor::reshaped(Shape shape) const {
  require(shape_size(shape) == size(),
          "reshape: element count mismatch " + shape_string(shape_) + " -> " +
              shape_string(shape));
  RingTensor out = *this;
  out.shape_ = std::move(shape);
  return out;
}

std::vector<int64_t> RingTensor::to_signed_vector() const {
  std::vector<int64_t> out(size());
  for (size_t i = 0; i < size(); ++i) out[i] = signed_at(i);
  return out;
}

bool RingTensor::operator==(const RingTensor& other) const {
  return shape_ == other.shape_ && bits() == other.bits() &&
         data_ == other.data_;
}

Word fp_encode(double x, const FixedPointConfig& fp) {
  fp.validate();
  // Range is checked after rounding so that values just below the limit
  // cannot wrap, and the most negative ring element stays encodable.
  const double scaled = std::round(std::ldexp(x, fp.frac_bits));
  const double half = std::ldexp(1.0, fp.total_bits - 1);
  if (!std::isfinite(scaled) || scaled < -half || scaled >= half) {
    throw RangeError("fp_encode: value out of fixed-point range");
  }
  return from_signed(int64_t(scaled), fp.total_bits);
}

double fp_decode(Word w, const FixedPointConfig& fp) {
  return std::ldexp(double(to_signed(w, fp.total_bits)), -fp.frac_bits);
}

RingTensor fp_encode(std::span<const double> values, Shape shape,
                     const FixedPointConfig& fp) {
  RingTensor t(std::move(shape), fp);
  require(values.size() == t.size(), "fp_encode: length mismatch");
  for (size_t i = 0; i < values.size(); ++i) t.set(i, fp_encode(values[i], fp));
  return t;
}

std::vector<double> fp_decode(const RingTensor& t) {
  std::vector<double> out(t.size());
  for (size_t i = 0; i < t.size(); ++i) out[i] = fp_decode(t[i], t.fp());
  return out;
}

RingTensor operator+(const RingTensor& a, const RingTensor& b) {
  require_same(a, b, "add");
  return with_array(a, a.array() + b.array());
}

RingTensor operator-(const RingTensor& a, const RingTensor& b) {
  require_same(a, b, "sub");
  return with_array(a, a.array() - b.array());
}

RingTensor operator*(const RingTensor& a, const RingTensor& b) {
  require_same(a, b, "mul");
  return with_array(a, a.array() * b.array());
}

RingTensor operator-(const RingTensor& a) {
  return with_array(a, RingTensor::Array::Zero(Eigen::Index(a.size())) -
                           a.array());
}

RingTensor scale(const RingTensor& a, Word s) {
  return with_array(a, a.array() * s);
}

RingTensor add_scalar(const RingTensor& a, Word s) {
  return with_array(a, a.array() + s);
}

RingTensor shift_right_arith(const RingTensor& a, int f) {
  require(f >= 0 && f < a.bits(), "shift_right_arith: bad shift");
  RingTensor out(a.shape(), a.fp());
  for (size_t i = 0; i < a.size(); ++i) {
    // >> on negative int64 is arithmetic (floor) since C++20.
    out.set(i, from_signed(a.signed_at(i) >> f, a.bits()));
  }
  return out;
}

RingTensor matmul(const RingTensor& a, const RingTensor& b) {
  require(a.rank() == 2 && b.rank() == 2, "matmul: operands must be rank 2");
  require(a.shape()[1] == b.shape()[0] && a.bits() == b.bits(),
          "matmul: inner dimensions differ " + shape_string(a.shape()) +
              " x " + shape_string(b.shape()));
  const auto m = Eigen::Index(a.shape()[0]);
  const auto k = Eigen::Index(a.shape()[1]);
  const auto n = Eigen::Index(b.shape()[1]);
  RingTensor out({size_t(m), size_t(n)}, a.fp());
  Eigen::Map<const RowMatrix> lhs(a.words().data(), m, k);
  Eigen::Map<const RowMatrix> rhs(b.words().data(), k, n);
  Eigen::Map<RowMatrix> dst(out.mutable_words().data(), m, n);
  dst.noalias() = lhs * rhs;
  return out.reduce();
}

size_t ConvGeometry::out_h() const {
  return (in_h + 2 * pad - kernel_h) / stride + 1;
}

size_t ConvGeometry::out_w() const {
  return (in_w + 2 * pad - kernel_w) / stride + 1;
}

void ConvGeometry::validate() const {
  require(in_channels > 0 && out_channels > 0 && stride > 0,
          "conv geometry: channels and stride must be positive");
  require(kernel_h > 0 && kernel_w > 0 && kernel_h <= in_h + 2 * pad &&
              kernel_w <= in_w + 2 * pad,
          "conv geometry: kernel does not fit the padded input");
}

RingTensor im2col(const RingTensor& x, const ConvGeometry& g) {
  g.validate();
  require(x.shape() == g.input_shape(),
          "im2col: input shape " + shape_string(x.shape()) +
              " does not match geometry " + shape_string(g.input_shape()));
  const size_t oh = g.out_h(), ow = g.out_w();
  const size_t rows = g.in_channels * g.kernel_h * g.kernel_w;
  RingTensor cols({rows, oh * ow}, x.fp());
  auto out = cols.mutable_words();
  auto in = x.words();
  for (size_t c = 0; c < g.in_channels; ++c) {
    for (size_t kh = 0; kh < g.kernel_h; ++kh) {
      for (size_t kw = 0; kw < g.kernel_w; ++kw) {
        const size_t row = (c * g.kernel_h + kh) * g.kernel_w + kw;
        for (size_t y = 0; y < oh; ++y) {
          const auto iy = std::ptrdiff_t(y * g.stride + kh) -
                          std::ptrdiff_t(g.pad);
          for (size_t xo = 0; xo < ow; ++xo) {
            const auto ix = std::ptrdiff_t(xo * g.stride + kw) -
                            std::ptrdiff_t(g.pad);
            Word v = 0;
            if (iy >= 0 && ix >= 0 && size_t(iy) < g.in_h &&
                size_t(ix) < g.in_w) {
              v = in[(c * g.in_h + size_t(iy)) * g.in_w + size_t(ix)];
            }
            out[row * oh * ow + y * ow + xo] = v;
          }
        }
      }
    }
  }
  return cols;
}

RingTensor conv2d(const RingTensor& x, const RingTensor& w,
                  const ConvGeometry& g) {
  require(w.shape() == g.weight_shape(),
          "conv2d: weight shape " + shape_string(w.shape()) +
              " does not match geometry " + shape_string(g.weight_shape()));
  const size_t k = g.in_channels * g.kernel_h * g.kernel_w;
  RingTensor out = matmul(w.reshaped({g.out_channels, k}), im2col(x, g));
  return out.reshaped(g.output_shape());
}

RingTensor conv2d(const RingTensor& x, const RingTensor& w, size_t stride,
                  size_t pad) {
  require(x.rank() == 3 && w.rank() == 4 && w.shape()[1] == x.shape()[0],
          "conv2d: expected [C,H,W] input and [OC,C,KH,KW] weights");
  ConvGeometry g{x.shape()[0], x.shape()[1], x.shape()[2], w.shape()[0],
                 w.shape()[2], w.shape()[3], stride, pad};
  return conv2d(x, w, g);
}

void write_tensor(std::ostream& os, const RingTensor& t) {
  os.write("PRT1", 4);
  os.put(char(uint8_t(t.bits())));
  os.put(char(uint8_t(t.fp().frac_bits)));
  write_u32(os, uint32_t(t.rank()));
  for (size_t d : t.shape()) write_u32(os, uint32_t(d));
  for (Word w : t.words()) write_u32(os, w);
}

RingTensor read_tensor(std::istream& is) {
  char magic[4];
  if (!is.read(magic, 4) || std::string(magic, 4) != "PRT1") {
    throw ConfigError("tensor file: bad magic");
  }
  FixedPointConfig fp;
  fp.total_bits = uint8_t(is.get());
  fp.frac_bits = uint8_t(is.get());
  if (!is || fp.total_bits < 2 || fp.total_bits > 32) {
    throw ConfigError("tensor file: bad ring width");
  }
  const uint32_t rank = read_u32(is);
  if (rank > 8) throw ConfigError("tensor file: rank too large");
  Shape shape(rank);
  for (auto& d : shape) d = read_u32(is);
  std::vector<Word> words(shape_size(shape));
  for (auto& w : words) w = read_u32(is);
  RingTensor t(std::move(shape), std::move(words), fp);
  return t;
}

void save_tensor(const std::string& path, const RingTensor& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot open " + path + " for writing");
  write_tensor(os, t);
}

RingTensor load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ConfigError("cannot open " + path);
  return read_tensor(is);
}

}  // namespace pi2pc
