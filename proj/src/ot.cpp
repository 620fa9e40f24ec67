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

#include "pi2pc/ot.hpp"

#include <sodium.h>

#include <string>

#include "pi2pc/bytes.hpp"
#include "pi2pc/error.hpp"

namespace pi2pc {

OtParams OtParams::default_group() {
  OtParams p;
  p.prime = mpz_class("4294967087");
  p.generator = 4;
  p.order = (p.prime - 1) / 2;
  return p;
}

OtParams OtParams::modp256() {
  OtParams p;
  p.prime = mpz_class(
      "ffffffffffffffffffffffffffffffffffffffffffffffffffffffffffff72ef", 16);
  p.generator = 4;
  p.order = (p.prime - 1) / 2;
  return p;
}

OtParams OtParams::toy23() {
  OtParams p;
  p.prime = 23;
  p.generator = 5;
  p.order = 22;
  return p;
}

size_t OtParams::element_bytes() const {
  return (mpz_sizeinbase(prime.get_mpz_t(), 2) + 7) / 8;
}

void OtParams::validate() const {
  if (prime < 5 || generator <= 1 || generator >= prime || order <= 1) {
    throw ConfigError("OT group parameters out of range");
  }
  if (chunk_bits != 2) throw ConfigError("OT chunk width must be 2 bits");
  if (powm(generator, order, prime) != 1) {
    throw ConfigError("OT generator does not have the stated order");
  }
}

mpz_class powm(const mpz_class& base, const mpz_class& exp,
               const mpz_class& mod) {
  mpz_class r;
  mpz_powm(r.get_mpz_t(), base.get_mpz_t(), exp.get_mpz_t(), mod.get_mpz_t());
  return r;
}

std::vector<uint8_t> encode_element(const mpz_class& x, const OtParams& p) {
  const size_t width = p.element_bytes();
  require(x >= 0 && x < p.prime, "group element out of range");
  std::vector<uint8_t> out(width, 0);
  size_t count = 0;
  std::vector<uint8_t> raw(width);
  mpz_export(raw.data(), &count, 1, 1, 1, 0, x.get_mpz_t());
  std::copy(raw.begin(), raw.begin() + long(count),
            out.begin() + long(width - count));
  return out;
}

mpz_class decode_element(std::span<const uint8_t> bytes, const OtParams& p) {
  if (bytes.size() != p.element_bytes()) {
    throw ProtocolAbort("group element has wrong width");
  }
  mpz_class x;
  mpz_import(x.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  return x;
}

bool in_group(const mpz_class& x, const OtParams& p) {
  if (x < 1 || x >= p.prime) return false;
  if (2 * p.order + 1 == p.prime) {
    // Safe prime: the order-q subgroup is exactly the quadratic residues.
    return mpz_jacobi(x.get_mpz_t(), p.prime.get_mpz_t()) == 1;
  }
  return powm(x, p.order, p.prime) == 1;
}

mpz_class random_exponent(const OtParams& p, Prg& rng) {
  std::vector<uint8_t> raw(p.element_bytes() + 8);
  rng.fill(raw);
  mpz_class x;
  mpz_import(x.get_mpz_t(), raw.size(), 1, 1, 1, 0, raw.data());
  x %= p.order - 1;
  return x + 1;
}

OtSenderState make_sender_state(const OtParams& p, const mpz_class& secret) {
  if (secret < 1 || secret >= p.order) {
    throw ContractError("OT sender secret must lie in [1, order - 1]");
  }
  OtSenderState st;
  st.secret = secret;
  st.s = powm(p.generator, secret, p.prime);
  st.t = powm(st.s, secret, p.prime);
  mpz_class t_inv;
  mpz_invert(t_inv.get_mpz_t(), st.t.get_mpz_t(), p.prime.get_mpz_t());
  mpz_class acc = t_inv;
  for (auto& v : st.t_inv_pows) {
    v = acc;
    acc = acc * t_inv % p.prime;
  }
  return st;
}

OtReceiverState make_receiver_state(const OtParams& p, const mpz_class& s) {
  if (!in_group(s, p) || s == 1) {
    throw ProtocolAbort("OT setup element is not a group element");
  }
  OtReceiverState st;
  st.s = s;
  st.s_pows[0] = 1;
  for (size_t i = 1; i < st.s_pows.size(); ++i) {
    st.s_pows[i] = st.s_pows[i - 1] * s % p.prime;
  }
  return st;
}

OtChoice ot_choice(const OtParams& p, const OtReceiverState& st, int choice,
                   Prg& rng) {
  require(choice >= 0 && choice < p.choices(), "OT choice out of range");
  const mpz_class b = random_exponent(p, rng);
  OtChoice out;
  out.r = powm(p.generator, b, p.prime) * st.s_pows[size_t(choice) + 1] %
          p.prime;
  out.key = powm(st.s, b, p.prime);
  return out;
}

std::array<mpz_class, 4> ot_sender_keys(const OtParams& p,
                                        const OtSenderState& st,
                                        const mpz_class& r) {
  // (R * S^-(j+1))^a = R^a * T^-(j+1)
  const mpz_class ra = powm(r, st.secret, p.prime);
  std::array<mpz_class, 4> keys;
  for (size_t j = 0; j < keys.size(); ++j) {
    keys[j] = ra * st.t_inv_pows[j] % p.prime;
  }
  return keys;
}

uint32_t ot_pad(const OtParams& p, const mpz_class& key, uint64_t instance,
                int j) {
  static const char kTag[] = "pi2pc-ot-pad";
  const auto key_bytes = encode_element(key, p);
  uint8_t suffix[9];
  for (int i = 0; i < 8; ++i) suffix[i] = uint8_t(instance >> (8 * i));
  suffix[8] = uint8_t(j);
  crypto_generichash_state state;
  uint8_t digest[16];
  crypto_generichash_init(&state, nullptr, 0, sizeof digest);
  crypto_generichash_update(&state, reinterpret_cast<const uint8_t*>(kTag),
                            sizeof kTag - 1);
  crypto_generichash_update(&state, key_bytes.data(), key_bytes.size());
  crypto_generichash_update(&state, suffix, sizeof suffix);
  crypto_generichash_final(&state, digest, sizeof digest);
  return uint32_t(digest[0]) | uint32_t(digest[1]) << 8 |
         uint32_t(digest[2]) << 16 | uint32_t(digest[3]) << 24;
}

OtSenderState ot_setup_sender(const OtParams& p, Prg& rng, Channel& ch) {
  OtSenderState st = make_sender_state(p, random_exponent(p, rng));
  ch.send(MsgType::kOtSetup, encode_element(st.s, p));
  return st;
}

OtReceiverState ot_setup_receiver(const OtParams& p, Channel& ch) {
  const auto msg = ch.recv(MsgType::kOtSetup);
  return make_receiver_state(p, decode_element(msg, p));
}

std::vector<mpz_class> ot_choose(const OtParams& p, const OtReceiverState& st,
                                 std::span<const uint8_t> choices, Prg& rng,
                                 Channel& ch) {
  ByteWriter w;
  std::vector<mpz_class> keys;
  keys.reserve(choices.size());
  for (uint8_t c : choices) {
    OtChoice oc = ot_choice(p, st, c, rng);
    w.put_bytes(encode_element(oc.r, p));
    keys.push_back(std::move(oc.key));
  }
  ch.send(MsgType::kOtChoice, w.bytes());
  return keys;
}

void ot_send(const OtParams& p, const OtSenderState& st,
             std::span<const uint32_t> payloads,
             std::span<const uint8_t> trailer, Channel& ch) {
  const int l = p.choices();
  const size_t n = payloads.size() / size_t(l);
  const size_t eb = p.element_bytes();
  const auto msg = ch.recv(MsgType::kOtChoice);
  if (msg.size() != n * eb) throw ProtocolAbort("OT choice message length");
  ByteWriter w;
  for (size_t i = 0; i < n; ++i) {
    const mpz_class r =
        decode_element(std::span(msg).subspan(i * eb, eb), p);
    if (!in_group(r, p)) {
      throw ProtocolAbort("OT choice element " + std::to_string(i) +
                          " is not a group element");
    }
    const auto keys = ot_sender_keys(p, st, r);
    for (int j = 0; j < l; ++j) {
      w.put_u32(payloads[i * size_t(l) + size_t(j)] ^
                ot_pad(p, keys[size_t(j)], i, j));
    }
  }
  w.put_bytes(trailer);
  ch.send(MsgType::kOtTable, w.bytes());
}

std::vector<uint32_t> ot_receive(const OtParams& p,
                                 std::span<const mpz_class> keys,
                                 std::span<const uint8_t> choices,
                                 std::vector<uint8_t>& trailer, Channel& ch) {
  const int l = p.choices();
  const size_t n = choices.size();
  const auto msg = ch.recv(MsgType::kOtTable);
  ByteReader r(msg);
  const auto table = r.get_words(n * size_t(l));
  std::vector<uint32_t> out(n);
  for (size_t i = 0; i < n; ++i) {
    const int c = choices[i];
    out[i] = table[i * size_t(l) + size_t(c)] ^ ot_pad(p, keys[i], i, c);
  }
  auto rest = r.get_bytes(r.remaining());
  trailer.assign(rest.begin(), rest.end());
  return out;
}

}  // namespace pi2pc
