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

#include <span>
#include <vector>

#include "pi2pc/correlated.hpp"
#include "pi2pc/sharing.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {

/// Symmetric swap of one message: S0 sends first, S1 receives first.
std::vector<uint8_t> exchange(Channel& ch, PartyId self, MsgType type,
                              std::span<const uint8_t> payload);

/// Opens the listed shares in one exchange and returns the reconstructed
/// tensors in the same order.
std::vector<RingTensor> open_shares(Channel& ch, MsgType type,
                                    const std::vector<const ShareTensor*>& xs);

/// Beaver multiplication under the triple's product (elementwise, matmul or
/// convolution). One round.
ShareTensor mul_2pc(const ShareTensor& x, const ShareTensor& y,
                    BeaverTriple& t, Channel& ch);

struct SquareOutcome {
  ShareTensor square;
  RingTensor opened;  // E = X - A, public after the exchange
};

/// Elementwise square. One round; the E*E term is added by S1 only.
ShareTensor square_2pc(const ShareTensor& x, SquarePair& p, Channel& ch);
SquareOutcome square_2pc_opened(const ShareTensor& x, SquarePair& p,
                                Channel& ch);

/// One term of a rescale: a shared value and, optionally, its masked
/// opening V + 2^(w-2) + R if the caller already holds it.
struct RescaleTerm {
  const ShareTensor* value = nullptr;
  const RingTensor* opened = nullptr;
};

/// floor(sum_t coeffs[t] * V_t / 2^shift) on shares in at most one round.
/// Each |V_t| must stay below 2^(w-2). The result is exact or one above.
ShareTensor rescale_2pc(const std::vector<RescaleTerm>& terms,
                        TruncationPair& p, Channel& ch);

/// Arithmetic shift right of a shared value by the pair's shift. One round.
ShareTensor truncate_2pc(const ShareTensor& x, TruncationPair& p, Channel& ch);

/// Local half of the rescale given every term's masked opening.
ShareTensor finish_rescale(PartyId party, const std::vector<RingTensor>& opened,
                           const TruncationPair& p);

}  // namespace pi2pc
