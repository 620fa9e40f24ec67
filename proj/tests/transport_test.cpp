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

#include <gtest/gtest.h>

#include <unistd.h>

#include <future>
#include <thread>

#include "pi2pc/error.hpp"
#include "pi2pc/transport.hpp"

namespace pi2pc {
namespace {

std::vector<uint8_t> bytes(std::initializer_list<uint8_t> b) { return b; }

// Fixed two-party script: three messages each way with mixed sizes.
std::string script(Channel& ch, bool first) {
  const std::vector<uint8_t> big(3000, 0x5a);
  if (first) {
    ch.send(MsgType::kPing, bytes({1, 2, 3}));
    ch.recv(MsgType::kBeaverOpen);
    ch.send(MsgType::kReveal, big);
  } else {
    ch.recv(MsgType::kPing);
    ch.send(MsgType::kBeaverOpen, {});
    ch.recv(MsgType::kReveal);
  }
  return ch.transcript_digest();
}

uint16_t test_port(int offset) {
  return uint16_t(20000 + (getpid() * 7 + offset) % 30000);
}

TEST(Transport, FreshChannelIsZero) {
  auto [a, b] = make_loopback_pair();
  const TranscriptReport r = a->report();
  EXPECT_EQ(r.messages, 0u);
  EXPECT_EQ(r.bytes, 0u);
  EXPECT_EQ(r.rounds, 0u);
  EXPECT_EQ(r.virtual_time, 0.0);
  EXPECT_EQ(r.link().messages, 0u);
}

TEST(Transport, EmptyPayloadCostsOneHeader) {
  auto [a, b] = make_loopback_pair();
  a->send(MsgType::kPing, {});
  EXPECT_TRUE(b->recv(MsgType::kPing).empty());
  EXPECT_EQ(a->report().messages, 1u);
  EXPECT_EQ(a->report().bytes, kFrameHeaderBytes);
  EXPECT_EQ(b->report().received.bytes, kFrameHeaderBytes);
  EXPECT_EQ(b->report().messages, 0u);
}

TEST(Transport, PayloadArrivesInOrder) {
  auto [a, b] = make_loopback_pair();
  a->send(MsgType::kPing, bytes({1}));
  a->send(MsgType::kPing, bytes({2, 3}));
  EXPECT_EQ(b->recv(MsgType::kPing), bytes({1}));
  EXPECT_EQ(b->recv(MsgType::kPing), bytes({2, 3}));
}

TEST(Transport, VirtualClockForOneMegabyte) {
  SimParams sim;
  sim.base_latency_s = 0.0;
  sim.bandwidth_bps = 8e9;
  auto [a, b] = make_loopback_pair(1, sim);
  a->send(MsgType::kPing, std::vector<uint8_t>(1 << 20));
  b->recv(MsgType::kPing);
  EXPECT_DOUBLE_EQ(a->report().virtual_time, 1.048576e-3);
}

TEST(Transport, AccountingIsExact) {
  SimParams sim;
  sim.base_latency_s = 1e-4;
  auto [a, b] = make_loopback_pair(1, sim);
  const size_t sizes[] = {0, 5, 100, 4096};
  double expect_time = 0;
  uint64_t expect_bytes = 0;
  for (size_t n : sizes) {
    a->send(MsgType::kPing, std::vector<uint8_t>(n));
    b->recv(MsgType::kPing);
    expect_time += 1e-4 + double(n) * 8 / sim.bandwidth_bps;
    expect_bytes += n + kFrameHeaderBytes;
  }
  EXPECT_EQ(a->report().bytes, expect_bytes);
  EXPECT_DOUBLE_EQ(a->report().virtual_time, expect_time);
  EXPECT_EQ(a->report().sent_by_type[size_t(MsgType::kPing)].payload_bytes,
            4201u);
}

TEST(Transport, RoundsCountDirectionChanges) {
  auto [a, b] = make_loopback_pair();
  a->send(MsgType::kPing, {});
  a->send(MsgType::kPing, {});
  b->recv(MsgType::kPing);
  b->recv(MsgType::kPing);
  b->send(MsgType::kPing, {});
  a->recv(MsgType::kPing);
  a->send(MsgType::kPing, {});
  EXPECT_EQ(a->report().rounds, 2u);
  EXPECT_EQ(b->report().rounds, 1u);
}

TEST(Transport, TypeMismatchAborts) {
  auto [a, b] = make_loopback_pair();
  a->send(MsgType::kPing, {});
  try {
    b->recv(MsgType::kReveal);
    FAIL() << "expected abort";
  } catch (const ProtocolAbort& e) {
    EXPECT_NE(std::string(e.what()).find("ping"), std::string::npos);
  }
}

TEST(Transport, SessionMismatchAborts) {
  // Frames carry the session id; a peer on another session is rejected.
  auto [a, b] = make_loopback_pair(3);
  EXPECT_EQ(a->session_id(), 3);
  a->keep_transcript(true);
  a->send(MsgType::kPing, {});
  const auto& raw = a->transcript();
  ASSERT_EQ(raw.size(), kFrameHeaderBytes);
  EXPECT_EQ(raw[6], 3);
  EXPECT_EQ(raw[4], uint8_t(MsgType::kPing));
  EXPECT_NO_THROW(b->recv(MsgType::kPing));
}

TEST(Transport, DisconnectAborts) {
  auto [a, b] = make_loopback_pair();
  a.reset();
  EXPECT_THROW(b->recv(MsgType::kPing), ProtocolAbort);
  EXPECT_THROW(b->send(MsgType::kPing, {}), ProtocolAbort);
}

TEST(Transport, MessageTypes) {
  EXPECT_TRUE(is_known_msg_type(1));
  EXPECT_TRUE(is_known_msg_type(12));
  EXPECT_FALSE(is_known_msg_type(0));
  EXPECT_FALSE(is_known_msg_type(13));
  EXPECT_TRUE(is_ot_flow(MsgType::kOtSetup));
  EXPECT_TRUE(is_ot_flow(MsgType::kOtReply));
  EXPECT_FALSE(is_ot_flow(MsgType::kAndOpen));
}

TEST(Transport, EnvironmentOverridesSimParams) {
  setenv("PI2PC_T_BC", "0.25", 1);
  setenv("PI2PC_RT_BW", "1000", 1);
  const SimParams s = SimParams::from_env({});
  EXPECT_EQ(s.base_latency_s, 0.25);
  EXPECT_EQ(s.bandwidth_bps, 1000.0);
  setenv("PI2PC_RT_BW", "0", 1);
  EXPECT_THROW(SimParams::from_env({}), ConfigError);
  unsetenv("PI2PC_T_BC");
  unsetenv("PI2PC_RT_BW");
}

TEST(Transport, TcpMatchesLoopbackTranscript) {
  auto [la, lb] = make_loopback_pair();
  auto fut = std::async(std::launch::async, [&] { return script(*lb, false); });
  const std::string loop_a = script(*la, true);
  const std::string loop_b = fut.get();

  std::unique_ptr<Channel> server;
  uint16_t port = 0;
  for (int attempt = 0; attempt < 5 && !server; ++attempt) {
    port = test_port(attempt);
    auto listener = std::async(std::launch::async,
                               [port] { return tcp_listen(port); });
    std::unique_ptr<Channel> client;
    try {
      client = tcp_connect("127.0.0.1", port, 1, {},
                           std::chrono::milliseconds(3000));
    } catch (const ProtocolAbort&) {
      try { listener.get(); } catch (const ProtocolAbort&) {}
      continue;
    }
    server = listener.get();
    auto peer = std::async(std::launch::async,
                           [&] { return script(*client, false); });
    EXPECT_EQ(script(*server, true), loop_a);
    EXPECT_EQ(peer.get(), loop_b);
    EXPECT_EQ(server->report().bytes, la->report().bytes);
    EXPECT_EQ(client->report().rounds, lb->report().rounds);
  }
  ASSERT_TRUE(server) << "no free port";
}

}  // namespace
}  // namespace pi2pc
