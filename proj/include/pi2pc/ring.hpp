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
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace pi2pc {

/// Storage word of a ring element. Rings narrower than 32 bits keep the
/// value in the low `bits` of the word with the rest zero.
using Word = uint32_t;
using Shape = std::vector<size_t>;

struct FixedPointConfig {
  int total_bits = 32;
  int frac_bits = 12;

  /// Checks 2 <= total_bits <= 32 and 0 < frac_bits < total_bits - 2.
  void validate() const;
  Word mask() const;

  bool operator==(const FixedPointConfig&) const = default;
};

size_t shape_size(const Shape& shape);
std::string shape_string(const Shape& shape);

int64_t to_signed(Word w, int bits);
Word from_signed(int64_t v, int bits);

/// Dense row-major tensor over Z_{2^bits}.
class RingTensor {
 public:
  using Array = Eigen::Array<Word, Eigen::Dynamic, 1>;
  using MapArray = Eigen::Map<Array>;
  using ConstMapArray = Eigen::Map<const Array>;

  RingTensor() = default;
  explicit RingTensor(Shape shape, FixedPointConfig fp = {});
  /// Takes ownership of `words`, reducing each modulo 2^bits.
  RingTensor(Shape shape, std::vector<Word> words, FixedPointConfig fp = {});

  static RingTensor from_signed(Shape shape, std::span<const int64_t> values,
                                FixedPointConfig fp = {});

  const Shape& shape() const { return shape_; }
  size_t size() const { return data_.size(); }
  size_t rank() const { return shape_.size(); }
  const FixedPointConfig& fp() const { return fp_; }
  int bits() const { return fp_.total_bits; }
  Word mask() const { return fp_.mask(); }

  Word operator[](size_t i) const { return data_[i]; }
  void set(size_t i, Word v) { data_[i] = v & mask(); }
  int64_t signed_at(size_t i) const { return to_signed(data_[i], bits()); }

  std::span<const Word> words() const { return data_; }
  /// Raw access; callers must keep values reduced (see reduce()).
  std::span<Word> mutable_words() { return data_; }

  ConstMapArray array() const { return {data_.data(), Eigen::Index(size())}; }
  MapArray array() { return {data_.data(), Eigen::Index(size())}; }

  /// Reduces every word modulo 2^bits in place.
  RingTensor& reduce();

  RingTensor reshaped(Shape shape) const;
  std::vector<int64_t> to_signed_vector() const;

  bool operator==(const RingTensor& other) const;

 private:
  Shape shape_;
  std::vector<Word> data_;
  FixedPointConfig fp_;
};

// Fixed-point codec.

/// round(x * 2^f) mod 2^bits. Throws RangeError unless
/// |x| < 2^(total_bits - f - 1).
Word fp_encode(double x, const FixedPointConfig& fp);
double fp_decode(Word w, const FixedPointConfig& fp);
RingTensor fp_encode(std::span<const double> values, Shape shape,
                     const FixedPointConfig& fp = {});
std::vector<double> fp_decode(const RingTensor& t);

// Elementwise ring arithmetic. Shapes and ring widths must match.

RingTensor operator+(const RingTensor& a, const RingTensor& b);
RingTensor operator-(const RingTensor& a, const RingTensor& b);
RingTensor operator*(const RingTensor& a, const RingTensor& b);
RingTensor operator-(const RingTensor& a);
RingTensor scale(const RingTensor& a, Word s);
RingTensor add_scalar(const RingTensor& a, Word s);

/// Arithmetic shift right under the signed interpretation.
RingTensor shift_right_arith(const RingTensor& a, int f);

/// [m,k] x [k,n] -> [m,n].
RingTensor matmul(const RingTensor& a, const RingTensor& b);

struct ConvGeometry {
  size_t in_channels = 1;
  size_t in_h = 1;
  size_t in_w = 1;
  size_t out_channels = 1;
  size_t kernel_h = 1;
  size_t kernel_w = 1;
  size_t stride = 1;
  size_t pad = 0;

  size_t out_h() const;
  size_t out_w() const;
  Shape input_shape() const { return {in_channels, in_h, in_w}; }
  Shape weight_shape() const {
    return {out_channels, in_channels, kernel_h, kernel_w};
  }
  Shape output_shape() const { return {out_channels, out_h(), out_w()}; }
  void validate() const;

  bool operator==(const ConvGeometry&) const = default;
};

/// [C,H,W] -> [C*KH*KW, OH*OW]; zero padding.
RingTensor im2col(const RingTensor& x, const ConvGeometry& g);

/// Exact ring convolution, [C,H,W] (*) [OC,C,KH,KW] -> [OC,OH,OW], computed
/// as im2col followed by one matmul. No rescaling.
RingTensor conv2d(const RingTensor& x, const RingTensor& w,
                  const ConvGeometry& g);
RingTensor conv2d(const RingTensor& x, const RingTensor& w, size_t stride,
                  size_t pad);

// Binary tensor format: "PRT1", u8 width, u8 frac bits, u32 rank,
// u32 dims[rank], then little-endian u32 words.

void write_tensor(std::ostream& os, const RingTensor& t);
RingTensor read_tensor(std::istream& is);
void save_tensor(const std::string& path, const RingTensor& t);
RingTensor load_tensor(const std::string& path);

}  // namespace pi2pc
