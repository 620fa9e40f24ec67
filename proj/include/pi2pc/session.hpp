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

#include "pi2pc/correlated.hpp"
#include "pi2pc/ot.hpp"
#include "pi2pc/ring.hpp"
#include "pi2pc/sharing.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {

/// Everything one party needs to run layer protocols: its id, the link to
/// the peer, its correlated-randomness queue and a private generator.
struct Session {
  Session(PartyId party, Channel& channel, CorrelatedStream& corr, Prg rng,
          FixedPointConfig fp = {}, OtParams ot = OtParams::default_group())
      : party(party),
        channel(channel),
        corr(corr),
        rng(std::move(rng)),
        fp(fp),
        ot(std::move(ot)) {}

  PartyId party;
  Channel& channel;
  CorrelatedStream& corr;
  Prg rng;
  FixedPointConfig fp;
  OtParams ot;
};

}  // namespace pi2pc
