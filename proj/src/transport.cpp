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

#include "pi2pc/transport.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sodium.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <condition_variable>
#include <cstdlib>
#include <cstring>
#include <deque>
#include <mutex>
#include <thread>

#include "pi2pc/error.hpp"

namespace pi2pc {

struct Channel::Digest {
  crypto_generichash_state state;
};

namespace {

constexpr uint32_t kMaxPayload = 1u << 30;

uint32_t load_u32(const uint8_t* p) {
  return uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
         uint32_t(p[3]) << 24;
}

uint16_t load_u16(const uint8_t* p) { return uint16_t(p[0] | p[1] << 8); }

// Both directions of a loopback link. Closing either end wakes the peer.
struct LoopbackLink {
  std::mutex mu;
  std::condition_variable cv;
  std::deque<std::vector<uint8_t>> queue[2];
  bool closed[2] = {false, false};
};

class LoopbackChannel final : public Channel {
 public:
  LoopbackChannel(std::shared_ptr<LoopbackLink> link, int side,
                  uint16_t session_id, SimParams sim)
      : Channel(session_id, sim), link_(std::move(link)), side_(side) {}

  ~LoopbackChannel() override {
    std::lock_guard lock(link_->mu);
    link_->closed[side_] = true;
    link_->cv.notify_all();
  }

 protected:
  void transmit(std::vector<uint8_t> frame) override {
    std::lock_guard lock(link_->mu);
    if (link_->closed[1 - side_]) throw ProtocolAbort("peer disconnected");
    link_->queue[1 - side_].push_back(std::move(frame));
    link_->cv.notify_all();
  }

  std::vector<uint8_t> receive_frame() override {
    std::unique_lock lock(link_->mu);
    auto& q = link_->queue[side_];
    link_->cv.wait(lock, [&] { return !q.empty() || link_->closed[1 - side_]; });
    if (q.empty()) throw ProtocolAbort("peer disconnected");
    auto frame = std::move(q.front());
    q.pop_front();
    return frame;
  }

 private:
  std::shared_ptr<LoopbackLink> link_;
  int side_;
};

class TcpChannel final : public Channel {
 public:
  TcpChannel(int fd, uint16_t session_id, SimParams sim)
      : Channel(session_id, sim), fd_(fd) {
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  }
  ~TcpChannel() override { ::close(fd_); }

 protected:
  void transmit(std::vector<uint8_t> frame) override {
    size_t off = 0;
    while (off < frame.size()) {
      ssize_t n = ::send(fd_, frame.data() + off, frame.size() - off,
                         MSG_NOSIGNAL);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw ProtocolAbort("tcp send failed: peer disconnected");
      off += size_t(n);
    }
  }

  std::vector<uint8_t> receive_frame() override {
    std::vector<uint8_t> frame(kFrameHeaderBytes);
    read_exact(frame.data(), kFrameHeaderBytes);
    const uint32_t len = load_u32(frame.data());
    if (len > kMaxPayload) throw ProtocolAbort("tcp frame too large");
    frame.resize(kFrameHeaderBytes + len);
    read_exact(frame.data() + kFrameHeaderBytes, len);
    return frame;
  }

 private:
  void read_exact(uint8_t* dst, size_t n) {
    size_t off = 0;
    while (off < n) {
      ssize_t r = ::recv(fd_, dst + off, n - off, 0);
      if (r < 0 && errno == EINTR) continue;
      if (r <= 0) throw ProtocolAbort("tcp recv failed: peer disconnected");
      off += size_t(r);
    }
  }

  int fd_;
};

}  // namespace

bool is_known_msg_type(uint16_t raw) {
  return raw >= 1 && raw < kMsgTypeSlots;
}

bool is_ot_flow(MsgType t) {
  return t == MsgType::kOtSetup || t == MsgType::kOtChoice ||
         t == MsgType::kOtTable || t == MsgType::kOtReply;
}

const char* to_string(MsgType t) {
  switch (t) {
    case MsgType::kShareInput: return "share-input";
    case MsgType::kShareWeights: return "share-weights";
    case MsgType::kBeaverOpen: return "beaver-open";
    case MsgType::kSquareOpen: return "square-open";
    case MsgType::kTruncOpen: return "trunc-open";
    case MsgType::kOtSetup: return "ot-setup";
    case MsgType::kOtChoice: return "ot-choice";
    case MsgType::kOtTable: return "ot-table";
    case MsgType::kOtReply: return "ot-reply";
    case MsgType::kAndOpen: return "and-open";
    case MsgType::kReveal: return "reveal";
    case MsgType::kPing: return "ping";
  }
  return "unknown";
}

SimParams SimParams::from_env(SimParams defaults) {
  if (const char* v = std::getenv("PI2PC_T_BC")) {
    defaults.base_latency_s = std::strtod(v, nullptr);
  }
  if (const char* v = std::getenv("PI2PC_RT_BW")) {
    defaults.bandwidth_bps = std::strtod(v, nullptr);
  }
  if (defaults.base_latency_s < 0 || !(defaults.bandwidth_bps > 0)) {
    throw ConfigError("invalid simulated link parameters");
  }
  return defaults;
}

double SimParams::frame_cost(size_t payload_bytes) const {
  return base_latency_s + double(payload_bytes) * 8.0 / bandwidth_bps;
}

TrafficCounters& TrafficCounters::operator+=(const TrafficCounters& o) {
  messages += o.messages;
  bytes += o.bytes;
  payload_bytes += o.payload_bytes;
  virtual_time += o.virtual_time;
  return *this;
}

TrafficCounters TrafficCounters::operator-(const TrafficCounters& o) const {
  return {messages - o.messages, bytes - o.bytes,
          payload_bytes - o.payload_bytes, virtual_time - o.virtual_time};
}

TrafficCounters TranscriptReport::link(MsgType t) const {
  TrafficCounters c = sent_by_type[size_t(t)];
  c += received_by_type[size_t(t)];
  return c;
}

TrafficCounters TranscriptReport::link() const {
  TrafficCounters c{messages, bytes, 0, virtual_time};
  for (const auto& t : sent_by_type) c.payload_bytes += t.payload_bytes;
  c += received;
  return c;
}

TrafficCounters TranscriptReport::ot_flow() const {
  TrafficCounters c;
  for (MsgType t : {MsgType::kOtSetup, MsgType::kOtChoice, MsgType::kOtTable,
                    MsgType::kOtReply}) {
    c += link(t);
  }
  return c;
}

TranscriptReport TranscriptReport::operator-(
    const TranscriptReport& earlier) const {
  TranscriptReport d;
  d.messages = messages - earlier.messages;
  d.bytes = bytes - earlier.bytes;
  d.rounds = rounds - earlier.rounds;
  d.virtual_time = virtual_time - earlier.virtual_time;
  d.wall_time = wall_time - earlier.wall_time;
  d.received = received - earlier.received;
  for (size_t i = 0; i < kMsgTypeSlots; ++i) {
    d.sent_by_type[i] = sent_by_type[i] - earlier.sent_by_type[i];
    d.received_by_type[i] = received_by_type[i] - earlier.received_by_type[i];
  }
  return d;
}

Channel::Channel(uint16_t session_id, SimParams sim)
    : session_id_(session_id),
      sim_(sim),
      digest_(std::make_unique<Digest>()),
      start_(std::chrono::steady_clock::now()) {
  if (sodium_init() < 0) throw std::runtime_error("libsodium init failed");
  crypto_generichash_init(&digest_->state, nullptr, 0, 32);
}

Channel::~Channel() = default;

void Channel::absorb(uint8_t direction, std::span<const uint8_t> frame) {
  crypto_generichash_update(&digest_->state, &direction, 1);
  crypto_generichash_update(&digest_->state, frame.data(), frame.size());
  if (keep_) raw_.insert(raw_.end(), frame.begin(), frame.end());
}

void Channel::send(MsgType type, std::span<const uint8_t> payload) {
  if (payload.size() > kMaxPayload) throw ContractError("payload too large");
  std::vector<uint8_t> frame(kFrameHeaderBytes + payload.size());
  const auto len = uint32_t(payload.size());
  for (int i = 0; i < 4; ++i) frame[i] = uint8_t(len >> (8 * i));
  frame[4] = uint8_t(uint16_t(type));
  frame[5] = uint8_t(uint16_t(type) >> 8);
  frame[6] = uint8_t(session_id_);
  frame[7] = uint8_t(session_id_ >> 8);
  if (!payload.empty()) {
    std::memcpy(frame.data() + kFrameHeaderBytes, payload.data(),
                payload.size());
  }
  absorb(0, frame);

  const double cost = sim_.frame_cost(payload.size());
  if (last_was_recv_) ++report_.rounds;
  last_was_recv_ = false;
  report_.messages += 1;
  report_.bytes += frame.size();
  report_.virtual_time += cost;
  auto& t = report_.sent_by_type[size_t(type)];
  t += {1, frame.size(), payload.size(), cost};

  transmit(std::move(frame));
}

std::vector<uint8_t> Channel::recv(MsgType expected) {
  std::vector<uint8_t> frame = receive_frame();
  if (frame.size() < kFrameHeaderBytes) throw ProtocolAbort("short frame");
  const uint32_t len = load_u32(frame.data());
  const uint16_t raw_type = load_u16(frame.data() + 4);
  const uint16_t session = load_u16(frame.data() + 6);
  if (len != frame.size() - kFrameHeaderBytes) {
    throw ProtocolAbort("frame length field does not match payload");
  }
  if (!is_known_msg_type(raw_type)) {
    throw ProtocolAbort("unknown message type " + std::to_string(raw_type));
  }
  if (session != session_id_) {
    throw ProtocolAbort("frame for session " + std::to_string(session) +
                        ", expected " + std::to_string(session_id_));
  }
  const auto type = static_cast<MsgType>(raw_type);
  if (type != expected) {
    throw ProtocolAbort(std::string("unexpected message: got ") +
                        to_string(type) + ", expected " + to_string(expected));
  }
  absorb(1, frame);

  const double cost = sim_.frame_cost(len);
  last_was_recv_ = true;
  report_.received += {1, frame.size(), len, cost};
  report_.received_by_type[size_t(type)] += {1, frame.size(), len, cost};
  frame.erase(frame.begin(), frame.begin() + kFrameHeaderBytes);
  return frame;
}

TranscriptReport Channel::report() const {
  TranscriptReport r = report_;
  r.wall_time = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - start_)
                    .count();
  return r;
}

std::string Channel::transcript_digest() const {
  crypto_generichash_state copy = digest_->state;
  uint8_t out[32];
  crypto_generichash_final(&copy, out, sizeof(out));
  char hex[65];
  sodium_bin2hex(hex, sizeof(hex), out, sizeof(out));
  return hex;
}

std::pair<std::unique_ptr<Channel>, std::unique_ptr<Channel>>
make_loopback_pair(uint16_t session_id, SimParams sim) {
  auto link = std::make_shared<LoopbackLink>();
  return {std::make_unique<LoopbackChannel>(link, 0, session_id, sim),
          std::make_unique<LoopbackChannel>(link, 1, session_id, sim)};
}

std::unique_ptr<Channel> tcp_listen(uint16_t port, uint16_t session_id,
                                    SimParams sim) {
  int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (lfd < 0) throw ProtocolAbort("socket() failed");
  int one = 1;
  ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0 ||
      ::listen(lfd, 1) != 0) {
    ::close(lfd);
    throw ProtocolAbort("cannot listen on port " + std::to_string(port) +
                        ": " + std::strerror(errno));
  }
  int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) throw ProtocolAbort("accept() failed");
  return std::make_unique<TcpChannel>(fd, session_id, sim);
}

std::unique_ptr<Channel> tcp_connect(const std::string& host, uint16_t port,
                                     uint16_t session_id, SimParams sim,
                                     std::chrono::milliseconds timeout) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints,
                    &res) != 0) {
    throw ProtocolAbort("cannot resolve " + host);
  }
  std::unique_ptr<addrinfo, decltype(&::freeaddrinfo)> guard(res,
                                                             ::freeaddrinfo);
  const auto deadline = std::chrono::steady_clock::now() + timeout;
  while (true) {
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) throw ProtocolAbort("socket() failed");
    if (::connect(fd, res->ai_addr, res->ai_addrlen) == 0) {
      return std::make_unique<TcpChannel>(fd, session_id, sim);
    }
    ::close(fd);
    if (std::chrono::steady_clock::now() > deadline) {
      throw ProtocolAbort("cannot connect to " + host + ":" +
                          std::to_string(port));
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
}

}  // namespace pi2pc
