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

#include "pi2pc/beaver.hpp"

#include "pi2pc/bytes.hpp"
#include "pi2pc/error.hpp"

namespace pi2pc {
namespace {

void require_party(const ShareTensor& a, const ShareTensor& b,
                   const char* what) {
  require(a.party == b.party,
          std::string(what) + ": shares belong to different parties");
}

}  // namespace

std::vector<uint8_t> exchange(Channel& ch, PartyId self, MsgType type,
                              std::span<const uint8_t> payload) {
  if (self == PartyId::kS0) {
    ch.send(type, payload);
    return ch.recv(type);
  }
  auto in = ch.recv(type);
  ch.send(type, payload);
  return in;
}

std::vector<RingTensor> open_shares(Channel& ch, MsgType type,
                                    const std::vector<const ShareTensor*>& xs) {
  require(!xs.empty(), "open_shares: nothing to open");
  const PartyId self = xs[0]->party;
  ByteWriter w;
  for (const ShareTensor* x : xs) {
    require(x->party == self, "open_shares: mixed parties");
    w.put_words(x->values.words());
  }
  const auto in = exchange(ch, self, type, w.bytes());
  ByteReader r(in);
  std::vector<RingTensor> out;
  out.reserve(xs.size());
  for (const ShareTensor* x : xs) {
    RingTensor peer(x->shape(), r.get_words(x->size()), x->fp());
    out.push_back(x->values + peer);
  }
  r.expect_end();
  return out;
}

ShareTensor mul_2pc(const ShareTensor& x, const ShareTensor& y,
                    BeaverTriple& t, Channel& ch) {
  require_party(x, y, "mul_2pc");
  require_party(x, t.a, "mul_2pc");
  require(x.shape() == t.op.lhs_shape && y.shape() == t.op.rhs_shape,
          "mul_2pc: operands do not match triple " + t.op.describe());
  consume(t, "mul_2pc");
  const ShareTensor e_i{x.party, x.values - t.a.values};
  const ShareTensor f_i{x.party, y.values - t.b.values};
  const auto opened = open_shares(ch, MsgType::kBeaverOpen, {&e_i, &f_i});
  const RingTensor& e = opened[0];
  const RingTensor& f = opened[1];
  RingTensor r = t.op.apply(x.values, f) + t.op.apply(e, y.values) +
                 t.z.values;
  if (x.party == PartyId::kS1) r = r - t.op.apply(e, f);
  return {x.party, std::move(r)};
}

SquareOutcome square_2pc_opened(const ShareTensor& x, SquarePair& p,
                                Channel& ch) {
  require_party(x, p.a, "square_2pc");
  require(x.shape() == p.a.shape(), "square_2pc: pair shape mismatch");
  consume(p, "square_2pc");
  const ShareTensor e_i{x.party, x.values - p.a.values};
  RingTensor e = open_shares(ch, MsgType::kSquareOpen, {&e_i})[0];
  RingTensor r = p.z.values + scale(e * p.a.values, 2);
  if (x.party == PartyId::kS1) r = r + e * e;
  return {{x.party, std::move(r)}, std::move(e)};
}

ShareTensor square_2pc(const ShareTensor& x, SquarePair& p, Channel& ch) {
  return square_2pc_opened(x, p, ch).square;
}

ShareTensor finish_rescale(PartyId party, const std::vector<RingTensor>& opened,
                           const TruncationPair& p) {
  const size_t terms = p.coeffs.size();
  require(opened.size() == terms && p.masks.size() == terms &&
              p.mask_msbs.size() == terms,
          "rescale: term count mismatch");
  const int w = p.rt.values.bits();
  const int s = p.shift;
  const size_t n = p.size();
  const uint64_t mask = p.rt.values.mask();
  RingTensor out(p.rt.shape(), p.rt.fp());
  int64_t offset = 0;
  for (int64_t c : p.coeffs) offset += c * (int64_t{1} << (w - 2 - s));
  for (size_t j = 0; j < n; ++j) {
    uint64_t acc = 0;
    if (party == PartyId::kS0) {
      __int128 sum = 0;
      for (size_t t = 0; t < terms; ++t) {
        sum += __int128(p.coeffs[t]) * __int128(opened[t][j]);
      }
      acc = uint64_t(int64_t(sum >> s) - offset);
    }
    acc -= p.rt.values[j];
    for (size_t t = 0; t < terms; ++t) {
      if ((opened[t][j] >> (w - 1)) & 1u) continue;
      acc += uint64_t(p.coeffs[t]) * (uint64_t{1} << (w - s)) *
             p.mask_msbs[t].values[j];
    }
    out.set(j, Word(acc & mask));
  }
  return {party, std::move(out)};
}

ShareTensor rescale_2pc(const std::vector<RescaleTerm>& terms,
                        TruncationPair& p, Channel& ch) {
  require(!terms.empty() && terms.size() == p.coeffs.size(),
          "rescale_2pc: term count does not match truncation pair");
  const ShareTensor& first = *terms[0].value;
  const PartyId party = first.party;
  require(party == p.rt.party, "rescale_2pc: pair belongs to other party");
  require(first.size() == p.size(), "rescale_2pc: size mismatch");
  consume(p, "rescale_2pc");
  const int w = first.values.bits();
  const Word bias = party == PartyId::kS0 ? Word(1) << (w - 2) : 0;

  std::vector<ShareTensor> to_open;
  std::vector<size_t> index;
  for (size_t t = 0; t < terms.size(); ++t) {
    require(terms[t].value->size() == p.size(), "rescale_2pc: size mismatch");
    if (terms[t].opened != nullptr) continue;
    RingTensor masked = terms[t].value->values.reshaped({p.size()}) +
                        p.masks[t].values;
    to_open.push_back({party, add_scalar(masked, bias)});
    index.push_back(t);
  }
  std::vector<RingTensor> opened(terms.size());
  if (!to_open.empty()) {
    std::vector<const ShareTensor*> ptrs;
    for (const auto& s : to_open) ptrs.push_back(&s);
    auto values = open_shares(ch, MsgType::kTruncOpen, ptrs);
    for (size_t k = 0; k < index.size(); ++k) {
      opened[index[k]] = std::move(values[k]);
    }
  }
  for (size_t t = 0; t < terms.size(); ++t) {
    if (terms[t].opened != nullptr) {
      opened[t] = terms[t].opened->reshaped({p.size()});
    }
  }
  ShareTensor out = finish_rescale(party, opened, p);
  out.values = out.values.reshaped(first.shape());
  return out;
}

ShareTensor truncate_2pc(const ShareTensor& x, TruncationPair& p,
                         Channel& ch) {
  require(p.coeffs.size() == 1, "truncate_2pc: expects a single-term pair");
  return rescale_2pc({{&x, nullptr}}, p, ch);
}

}  // namespace pi2pc
