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

#include "pi2pc/random.hpp"

#include <sodium.h>

#include <cstring>
#include <stdexcept>

#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

void ensure_sodium() {
  static const bool ready = sodium_init() >= 0;
  if (!ready) throw std::runtime_error("libsodium initialisation failed");
}

Prg::Key hash_key(const uint8_t* data, size_t len) {
  Prg::Key key{};
  crypto_generichash(key.data(), key.size(), data, len, nullptr, 0);
  return key;
}

}  // namespace

Prg::Prg(uint64_t seed) {
  ensure_sodium();
  uint8_t bytes[16] = {'p', 'i', '2', 'p', 'c', '-', 's', 'e'};
  std::memcpy(bytes + 8, &seed, sizeof(seed));
  key_ = hash_key(bytes, sizeof(bytes));
}

Prg::Prg(const Key& key) : key_(key) { ensure_sodium(); }

Prg Prg::from_entropy() {
  ensure_sodium();
  Key key{};
  randombytes_buf(key.data(), key.size());
  return Prg(key);
}

void Prg::refill() {
  uint8_t nonce[crypto_stream_chacha20_NONCEBYTES] = {};
  std::memcpy(nonce, &block_, sizeof(block_));
  crypto_stream_chacha20(buffer_.data(), buffer_.size(), nonce, key_.data());
  ++block_;
  pos_ = 0;
}

void Prg::fill(std::span<uint8_t> out) {
  size_t done = 0;
  while (done < out.size()) {
    if (pos_ == buffer_.size()) refill();
    size_t n = std::min(out.size() - done, buffer_.size() - pos_);
    std::memcpy(out.data() + done, buffer_.data() + pos_, n);
    pos_ += n;
    done += n;
  }
}

Prg::result_type Prg::operator()() {
  uint64_t v;
  fill({reinterpret_cast<uint8_t*>(&v), sizeof(v)});
  return v;
}

uint32_t Prg::next_u32() {
  uint32_t v;
  fill({reinterpret_cast<uint8_t*>(&v), sizeof(v)});
  return v;
}

bool Prg::next_bit() { return (next_u32() & 1u) != 0; }

uint64_t Prg::uniform(uint64_t bound) {
  require(bound != 0, "Prg::uniform: bound must be non-zero");
  const uint64_t limit = max() - max() % bound;
  uint64_t v;
  do {
    v = (*this)();
  } while (v >= limit);
  return v % bound;
}

Prg Prg::derive(uint64_t label) const {
  uint8_t bytes[40];
  std::memcpy(bytes, key_.data(), 32);
  std::memcpy(bytes + 32, &label, sizeof(label));
  return Prg(hash_key(bytes, sizeof(bytes)));
}

}  // namespace pi2pc
