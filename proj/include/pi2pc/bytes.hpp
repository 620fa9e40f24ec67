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
#include <cstring>
#include <span>
#include <string>
#include <vector>

#include "pi2pc/error.hpp"
#include "pi2pc/ring.hpp"

namespace pi2pc {

/// Little-endian payload builder.
class ByteWriter {
 public:
  void put_u8(uint8_t v) { buf_.push_back(v); }
  void put_u16(uint16_t v) { put_le(v, 2); }
  void put_u32(uint32_t v) { put_le(v, 4); }
  void put_u64(uint64_t v) { put_le(v, 8); }
  void put_words(std::span<const Word> words) {
    buf_.reserve(buf_.size() + 4 * words.size());
    for (Word w : words) put_u32(w);
  }
  void put_bytes(std::span<const uint8_t> bytes) {
    buf_.insert(buf_.end(), bytes.begin(), bytes.end());
  }
  /// Packs bits LSB-first into ceil(n/8) bytes.
  void put_bits(const std::vector<uint8_t>& bits) {
    size_t start = buf_.size();
    buf_.resize(start + (bits.size() + 7) / 8, 0);
    for (size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] & 1) buf_[start + i / 8] |= uint8_t(1u << (i % 8));
    }
  }

  std::vector<uint8_t>& bytes() { return buf_; }
  std::vector<uint8_t> take() { return std::move(buf_); }

 private:
  void put_le(uint64_t v, int n) {
    for (int i = 0; i < n; ++i) buf_.push_back(uint8_t(v >> (8 * i)));
  }
  std::vector<uint8_t> buf_;
};

/// Bounds-checked reader over a received payload; running past the end
/// raises ProtocolAbort.
class ByteReader {
 public:
  explicit ByteReader(std::span<const uint8_t> data) : data_(data) {}

  uint8_t get_u8() { return uint8_t(get_le(1)); }
  uint16_t get_u16() { return uint16_t(get_le(2)); }
  uint32_t get_u32() { return uint32_t(get_le(4)); }
  uint64_t get_u64() { return get_le(8); }
  std::vector<Word> get_words(size_t n) {
    need(4 * n);
    std::vector<Word> out(n);
    for (size_t i = 0; i < n; ++i) out[i] = get_u32();
    return out;
  }
  std::span<const uint8_t> get_bytes(size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<uint8_t> get_bits(size_t n) {
    auto raw = get_bytes((n + 7) / 8);
    std::vector<uint8_t> bits(n);
    for (size_t i = 0; i < n; ++i) bits[i] = (raw[i / 8] >> (i % 8)) & 1u;
    return bits;
  }

  size_t remaining() const { return data_.size() - pos_; }
  void expect_end() const {
    if (remaining() != 0) throw ProtocolAbort("trailing bytes in message");
  }

 private:
  void need(size_t n) const {
    if (data_.size() - pos_ < n) throw ProtocolAbort("message too short");
  }
  uint64_t get_le(int n) {
    need(size_t(n));
    uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= uint64_t(data_[pos_ + i]) << (8 * i);
    pos_ += size_t(n);
    return v;
  }

  std::span<const uint8_t> data_;
  size_t pos_ = 0;
};

}  // namespace pi2pc
