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

#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "pi2pc/random.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {

/// Public group for the 1-of-4 oblivious transfer: a subgroup of Z_m^* of
/// prime order `order`, generated by `generator`.
struct OtParams {
  mpz_class prime;
  mpz_class generator;
  mpz_class order;
  int chunk_bits = 2;

  /// 32-bit safe prime 4294967087 with g = 4 generating the quadratic
  /// residues; one group element is 32 bits on the wire.
  static OtParams default_group();
  /// 256-bit safe prime 2^256 - 36113, g = 4.
  static OtParams modp256();
  /// m = 23, g = 5 (full group, order 22). Hand-checkable, not secure.
  static OtParams toy23();

  /// Candidate messages per transfer (4 for 2-bit chunks).
  int choices() const { return 1 << chunk_bits; }
  /// Wire width of a group element.
  size_t element_bytes() const;
  void validate() const;
};

/// Fixed-width big-endian encoding of a group element.
std::vector<uint8_t> encode_element(const mpz_class& x, const OtParams& p);
mpz_class decode_element(std::span<const uint8_t> bytes, const OtParams& p);
/// 1 <= x < m and x lies in the order-`order` subgroup.
bool in_group(const mpz_class& x, const OtParams& p);
mpz_class powm(const mpz_class& base, const mpz_class& exp,
               const mpz_class& mod);

/// Uniform exponent in [1, order - 1].
mpz_class random_exponent(const OtParams& p, Prg& rng);

struct OtSenderState {
  mpz_class secret;  // rd_S0
  mpz_class s;       // S = g^rd
  mpz_class t;       // S^rd
  std::array<mpz_class, 4> t_inv_pows;  // T^-(j+1), j = 0..3
};

struct OtReceiverState {
  mpz_class s;
  std::array<mpz_class, 5> s_pows;  // S^0 .. S^4
};

/// Sender state from a chosen secret; rd must lie in [1, order - 1].
OtSenderState make_sender_state(const OtParams& p, const mpz_class& secret);
OtReceiverState make_receiver_state(const OtParams& p, const mpz_class& s);

/// Receiver's side of one transfer: the element R it sends for choice c and
/// the key it will decrypt with.
struct OtChoice {
  mpz_class r;
  mpz_class key;
};
OtChoice ot_choice(const OtParams& p, const OtReceiverState& st, int choice,
                   Prg& rng);
/// The four keys the sender derives from a receiver element R.
std::array<mpz_class, 4> ot_sender_keys(const OtParams& p,
                                        const OtSenderState& st,
                                        const mpz_class& r);
/// Pad for payload slot j of transfer `instance` under `key`.
uint32_t ot_pad(const OtParams& p, const mpz_class& key, uint64_t instance,
                int j);

// Batched message steps. One batch is n independent transfers.

/// Step 1 (sender): sample rd, send S.
OtSenderState ot_setup_sender(const OtParams& p, Prg& rng, Channel& ch);
/// Step 1 (receiver): receive and check S.
OtReceiverState ot_setup_receiver(const OtParams& p, Channel& ch);
/// Step 2 (receiver): send one element per choice; returns the keys.
std::vector<mpz_class> ot_choose(const OtParams& p, const OtReceiverState& st,
                                 std::span<const uint8_t> choices, Prg& rng,
                                 Channel& ch);
/// Step 3 (sender): receive the choice elements, send the encrypted
/// 4 x n table (payload[4*i + j] for transfer i), followed by `trailer`.
void ot_send(const OtParams& p, const OtSenderState& st,
             std::span<const uint32_t> payloads,
             std::span<const uint8_t> trailer, Channel& ch);
/// Step 3 (receiver): receive the table and decrypt the chosen entries.
/// Returns the decrypted words; `trailer` receives the bytes after the table.
std::vector<uint32_t> ot_receive(const OtParams& p,
                                 std::span<const mpz_class> keys,
                                 std::span<const uint8_t> choices,
                                 std::vector<uint8_t>& trailer, Channel& ch);

}  // namespace pi2pc
