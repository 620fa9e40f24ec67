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

#include <array>
#include <chrono>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pi2pc {

enum class MsgType : uint16_t {
  kShareInput = 1,
  kShareWeights = 2,
  kBeaverOpen = 3,
  kSquareOpen = 4,
  kTruncOpen = 5,
  kOtSetup = 6,   // step 1: S = g^a
  kOtChoice = 7,  // step 2: receiver group elements
  kOtTable = 8,   // step 3: encrypted 4 x U table
  kOtReply = 9,   // step 4: receiver's first combine-layer openings
  kAndOpen = 10,
  kReveal = 11,
  kPing = 12,
};

inline constexpr size_t kMsgTypeSlots = 13;
inline constexpr size_t kFrameHeaderBytes = 8;

bool is_known_msg_type(uint16_t raw);
bool is_ot_flow(MsgType t);
const char* to_string(MsgType t);

/// Link model used by the virtual clock: every frame costs
/// base_latency + payload_bits / bandwidth.
struct SimParams {
  double base_latency_s = 50e-6;
  double bandwidth_bps = 8e9;

  /// Applies PI2PC_T_BC / PI2PC_RT_BW environment overrides.
  static SimParams from_env(SimParams defaults);
  double frame_cost(size_t payload_bytes) const;
};

struct TrafficCounters {
  uint64_t messages = 0;
  uint64_t bytes = 0;  // header included
  uint64_t payload_bytes = 0;
  double virtual_time = 0.0;

  TrafficCounters& operator+=(const TrafficCounters& o);
  TrafficCounters operator-(const TrafficCounters& o) const;
};

/// Snapshot of one endpoint's counters. The top-level fields describe
/// frames this endpoint sent; `received` mirrors them for inbound frames.
struct TranscriptReport {
  uint64_t messages = 0;
  uint64_t bytes = 0;
  uint64_t rounds = 0;
  double virtual_time = 0.0;
  double wall_time = 0.0;

  TrafficCounters received;
  std::array<TrafficCounters, kMsgTypeSlots> sent_by_type{};
  std::array<TrafficCounters, kMsgTypeSlots> received_by_type{};

  /// Both directions, restricted to one message type.
  TrafficCounters link(MsgType t) const;
  /// Both directions, all types.
  TrafficCounters link() const;
  /// Both directions over the four OT-flow message types.
  TrafficCounters ot_flow() const;

  TranscriptReport operator-(const TranscriptReport& earlier) const;
};

/// Framed, counted, in-order message channel between the two servers.
///
/// Frame: u32 payload length (LE), u16 message type, u16 session id,
/// payload. A receive whose type differs from the expected one aborts.
class Channel {
 public:
  Channel(uint16_t session_id, SimParams sim);
  virtual ~Channel();

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void send(MsgType type, std::span<const uint8_t> payload);
  std::vector<uint8_t> recv(MsgType expected);

  TranscriptReport report() const;
  /// Hex BLAKE2b over every frame sent and received, in order.
  std::string transcript_digest() const;

  /// Keeps a raw copy of every frame (for transcript inspection in tests).
  void keep_transcript(bool on) { keep_ = on; }
  const std::vector<uint8_t>& transcript() const { return raw_; }

  uint16_t session_id() const { return session_id_; }
  const SimParams& sim() const { return sim_; }

 protected:
  virtual void transmit(std::vector<uint8_t> frame) = 0;
  virtual std::vector<uint8_t> receive_frame() = 0;

 private:
  void absorb(uint8_t direction, std::span<const uint8_t> frame);

  uint16_t session_id_;
  SimParams sim_;
  TranscriptReport report_;
  bool last_was_recv_ = true;
  bool keep_ = false;
  std::vector<uint8_t> raw_;
  struct Digest;
  std::unique_ptr<Digest> digest_;
  std::chrono::steady_clock::time_point start_;
};

/// In-process pair of connected endpoints; one per party thread.
std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
make_loopback_pair(uint16_t session_id = 1, SimParams sim = {});

/// TCP endpoint. `listen` blocks until the peer connects; `connect`
/// retries until `timeout` elapses.
std::unique_ptr<Channel> tcp_listen(uint16_t port, uint16_t session_id = 1,
                                    SimParams sim = {});
std::unique_ptr<Channel> tcp_connect(
    const std::string& host, uint16_t port, uint16_t session_id = 1,
    SimParams sim = {},
    std::chrono::milliseconds timeout = std::chrono::seconds(30));

}  // namespace pi2pc
