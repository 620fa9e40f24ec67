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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "pi2pc/beaver.hpp"
#include "pi2pc/compare.hpp"
#include "pi2pc/cost_model.hpp"
#include "pi2pc/model_zoo.hpp"
#include "pi2pc/operators.hpp"
#include "pi2pc/runtime.hpp"
#include "two_party.hpp"

extern char** environ;

namespace pi2pc {
namespace {

using testing::TwoParty;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool ok = true;
  std::string detail;

  void check(bool cond, const std::string& what) {
    if (!cond) {
      ok = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, v);
  return buf;
}

// Exhaustive small-ring protocol checks.

Outcome protocol_correctness() {
  Outcome out;
  const auto t0 = Clock::now();

  // compare_2pc over every 8-bit pair.
  {
    const FixedPointConfig fp{8, 3};
    const size_t n = 256 * 256;
    RingTensor m0({n}, fp), m1({n}, fp);
    for (size_t i = 0; i < n; ++i) {
      m0.set(i, Word(i >> 8));
      m1.set(i, Word(i & 255));
    }
    TwoParty tp(1, fp);
    deal_compare(tp.dealer, tp.streams, n, 8);
    auto [b0, b1] = tp.run([&](Session& s) {
      return compare_2pc(s.party == PartyId::kS0 ? m0 : m1, 8, s);
    });
    const auto gt = reconstruct_bits(b0, b1);
    size_t agree = 0;
    for (size_t i = 0; i < n; ++i) agree += gt[i] == ((i >> 8) > (i & 255));
    out.check(agree == n, "compare agreed on " + std::to_string(agree) + "/" +
                              std::to_string(n));
  }

  // mul_2pc and square_2pc over every 6-bit operand.
  {
    const FixedPointConfig fp{6, 2};
    const size_t n = 64 * 64;
    RingTensor x({n}, fp), y({n}, fp), v({64}, fp);
    for (size_t i = 0; i < n; ++i) {
      x.set(i, Word(i / 64));
      y.set(i, Word(i % 64));
    }
    for (Word i = 0; i < 64; ++i) v.set(i, i);
    TwoParty tp(2, fp);
    Dealer dealer(Prg(2).derive(0), 6);
    Prg rng(20);
    const auto xs = share(x, rng), ys = share(y, rng), vs = share(v, rng);
    auto triple = dealer.triple(BilinearOp::elementwise({n}));
    auto pair = dealer.square_pair({64});
    auto [r0, r1] = tp.run([&](Session& s) {
      ShareTensor m = mul_2pc(xs[s.party], ys[s.party], triple[s.party],
                              s.channel);
      ShareTensor q = square_2pc(vs[s.party], pair[s.party], s.channel);
      return std::make_pair(m, q);
    });
    const RingTensor prod = reconstruct(r0.first, r1.first);
    const RingTensor sq = reconstruct(r0.second, r1.second);
    size_t bad = 0;
    for (size_t i = 0; i < n; ++i) bad += prod[i] != Word((i / 64) * (i % 64) % 64);
    for (Word i = 0; i < 64; ++i) bad += sq[i] != i * i % 64;
    out.check(bad == 0, std::to_string(bad) + " wrong mul/square results");
  }

  const double secs = seconds_since(t0);
  out.check(secs <= 120.0, "took " + fmt("%.1f s", secs));
  if (out.ok) {
    out.detail = "65536/65536 compares, 4096 products, 64 squares exact in " +
                 fmt("%.1f s", secs);
  }
  return out;
}

// End-to-end equivalence, loopback and two processes over TCP.

int spawn_wait(const std::vector<std::string>& args, bool wait, pid_t* pid) {
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 1, "/dev/null", O_WRONLY, 0);
  pid_t p = 0;
  const int rc = posix_spawn(&p, argv[0], &fa, nullptr, argv.data(), environ);
  posix_spawn_file_actions_destroy(&fa);
  if (rc != 0) return -1;
  if (pid) *pid = p;
  if (!wait) return 0;
  int status = 0;
  waitpid(p, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int wait_for(pid_t p) {
  int status = 0;
  waitpid(p, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

nlohmann::json read_json(const std::string& path) {
  std::ifstream is(path);
  return nlohmann::json::parse(is);
}

Outcome end_to_end(const std::string& cli) {
  Outcome out;
  const auto t0 = Clock::now();
  const size_t count = 1000;
  const uint64_t seed = 2024;
  const GraphSpec g = reference_cnn();
  const HardwareProfile hw;
  const auto weights = random_weights(g, seed);
  const auto inputs = random_inputs(g, count, seed);

  auto [l0, l1] = run_loopback(g, hw, weights, inputs, seed);
  int rescale_stages = 0;
  for (const auto& l : g.layers) {
    rescale_stages += l.kind == LayerKind::kConv ||
                      l.kind == LayerKind::kDense ||
                      l.kind == LayerKind::kX2act ||
                      l.kind == LayerKind::kAvgPool;
  }
  const int64_t tol = 2 * rescale_stages;
  int64_t worst = 0;
  for (size_t i = 0; i < count; ++i) {
    const RingTensor want = run_plain_reference(g, inputs[i], weights);
    for (size_t k = 0; k < want.size(); ++k) {
      worst = std::max<int64_t>(
          worst, std::llabs(l1.logits[i].signed_at(k) - want.signed_at(k)));
    }
  }
  out.check(l1.logits.size() == count, "missing logits");
  out.check(worst <= tol, "max error " + std::to_string(worst) + " ulp > " +
                              std::to_string(tol));

  // Same run as three processes: dealer, then both servers over TCP.
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() /
                       ("pi2pc_accept_" + std::to_string(getpid()));
  fs::create_directories(dir);
  const std::string graph = (dir / "graph.json").string();
  const std::string hwp = (dir / "hw.json").string();
  const std::string wpath = (dir / "weights.bin").string();
  const std::string ipath = (dir / "input.bin").string();
  const std::string corr = (dir / "corr").string();
  std::ofstream(graph) << graph_to_json(g);
  std::ofstream(hwp) << hw.to_json();
  save_weights(wpath, weights);
  save_inputs(ipath, inputs);
  const std::string port = std::to_string(21000 + getpid() % 20000);
  const std::string s = std::to_string(seed);

  const int dealer_rc = spawn_wait({cli, "run", "--role", "dealer", "--graph",
                                    graph, "--input", ipath, "--corr", corr,
                                    "--seed", s},
                                   true, nullptr);
  out.check(dealer_rc == 0, "dealer exited " + std::to_string(dealer_rc));
  pid_t p0 = 0;
  const std::string rep0 = (dir / "s0.json").string();
  const std::string rep1 = (dir / "s1.json").string();
  if (dealer_rc == 0 &&
      spawn_wait({cli, "run", "--role", "server0", "--mode", "tcp", "--graph",
                  graph, "--hw", hwp, "--weights", wpath, "--corr", corr,
                  "--listen", port, "--seed", s, "--report", rep0},
                 false, &p0) == 0) {
    const int rc1 = spawn_wait(
        {cli, "run", "--role", "server1", "--mode", "tcp", "--graph", graph,
         "--hw", hwp, "--input", ipath, "--corr", corr, "--connect",
         "127.0.0.1:" + port, "--seed", s, "--report", rep1},
        true, nullptr);
    const int rc0 = wait_for(p0);
    out.check(rc0 == 0 && rc1 == 0, "tcp servers exited " +
                                        std::to_string(rc0) + "/" +
                                        std::to_string(rc1));
    if (rc0 == 0 && rc1 == 0) {
      const auto j0 = read_json(rep0), j1 = read_json(rep1);
      out.check(j0.at("transcript_digest") == l0.transcript_digest,
                "server0 transcript differs from loopback");
      out.check(j1.at("transcript_digest") == l1.transcript_digest,
                "server1 transcript differs from loopback");
      out.check(j1.at("totals").at("comm_bytes") == l1.totals.comm_bytes,
                "byte counts differ");
      const auto& lf = j1.at("logits_fixed");
      bool same = lf.size() == count;
      for (size_t i = 0; same && i < count; ++i) {
        same = lf[i].get<std::vector<int64_t>>() ==
               l1.logits[i].to_signed_vector();
      }
      out.check(same, "tcp logits differ from loopback");
    }
  } else {
    out.check(false, "could not start the servers");
  }
  std::error_code ec;
  fs::remove_all(dir, ec);

  const double secs = seconds_since(t0);
  out.check(secs <= 300.0, "took " + fmt("%.1f s", secs));
  if (out.ok) {
    out.detail = std::to_string(count) + " inputs, max error " +
                 std::to_string(worst) + " ulp (limit " + std::to_string(tol) +
                 "), tcp transcripts identical, " + fmt("%.1f s", secs);
  }
  return out;
}

// Measured traffic against the latency model.

template <class Deal, class Op>
TranscriptReport measure(uint64_t seed, const RingTensor& x, Deal deal,
                         Op op) {
  TwoParty tp(seed);
  Prg rng(seed);
  const auto xs = share(x, rng);
  deal(tp.dealer, tp.streams);
  tp.run([&](Session& s) { return op(xs[s.party], s); });
  return tp.c0->report();
}

RingTensor random_map(size_t ic, size_t fi, uint64_t seed) {
  Prg rng(seed);
  std::uniform_real_distribution<double> d(-4, 4);
  std::vector<double> v(ic * fi * fi);
  for (double& e : v) e = d(rng);
  return fp_encode(v, {ic, fi, fi});
}

Outcome cost_model_fidelity() {
  Outcome out;
  const HardwareProfile hw;
  double worst = 0;
  uint64_t relu_rounds = 0;
  for (size_t fi : {4, 8, 16}) {
    for (size_t ic : {1, 4, 16}) {
      const RingTensor x = random_map(ic, fi, fi * 100 + ic);
      const auto r = measure(
          fi + ic, x,
          [&](Dealer& d, StreamPair& s) { deal_relu(d, s, x.shape()); },
          [](const ShareTensor& v, Session& s) { return relu2pc(v, s); });
      const auto e =
          model_operator(OpKind::kReLU, LayerGeometry::from_map(x.shape()), hw);
      const ValidationReport v = validate_against_transcript(e, r);
      worst = std::max(worst, v.relative_error);
      out.check(v.relative_error <= 0.05,
                "ReLU FI=" + std::to_string(fi) + " IC=" + std::to_string(ic) +
                    " off by " + fmt("%.2f%%", 100 * v.relative_error));
      out.check(v.comparison_batches == 1, "ReLU used more than one batch");
      relu_rounds = r.rounds;
    }
  }

  const RingTensor x = random_map(4, 8, 7);
  const auto x2 = measure(
      7, x,
      [&](Dealer& d, StreamPair& s) {
        deal_x2act(d, s, x.shape(), X2actParams{}, FixedPointConfig{});
      },
      [](const ShareTensor& v, Session& s) {
        return x2act2pc(v, X2actParams{}, s);
      });
  const auto x2_model =
      model_operator(OpKind::kX2act, LayerGeometry::from_map(x.shape()), hw);
  out.check(x2.rounds == 2 && x2_model.rounds == 2,
            "X2act took " + std::to_string(x2.rounds) + " rounds");
  out.check(x2.ot_flow().messages == 0, "X2act used the OT flow");

  const PoolGeometry pg{4, 8, 8, 2, 2, 2, 2};
  const auto avg = measure(
      8, x,
      [&](Dealer& d, StreamPair& s) { deal_avgpool(d, s, pg, 12); },
      [&](const ShareTensor& v, Session& s) { return avgpool2pc(v, pg, s); });
  out.check(avg.ot_flow().bytes == 0, "AvgPool sent OT-flow bytes");

  const auto maxp = measure(
      9, x, [&](Dealer& d, StreamPair& s) { deal_maxpool(d, s, pg); },
      [&](const ShareTensor& v, Session& s) { return maxpool2pc(v, pg, s); });
  const uint64_t stages = maxp.link(MsgType::kOtSetup).messages;
  out.check(stages == 3, "MaxPool ran " + std::to_string(stages) +
                             " comparison stages");
  out.check(maxp.rounds == 3 * relu_rounds,
            "MaxPool rounds " + std::to_string(maxp.rounds) + " != 3 x " +
                std::to_string(relu_rounds));

  if (out.ok) {
    out.detail = "ReLU bits within " + fmt("%.2f%%", 100 * worst) +
                 " over 9 geometries, X2act 2 rounds, AvgPool 0 OT bytes, "
                 "MaxPool 3 stages";
  }
  return out;
}

Outcome fig1_ratio() {
  Outcome out;
  HardwareProfile hw;  // PP=4, 200 MHz, 1 GB/s
  const LayerGeometry g = LayerGeometry::from_map({64, 56, 56});
  const double relu = model_operator(OpKind::kReLU, g, hw).latency_s;
  const double x2 = model_operator(OpKind::kX2act, g, hw).latency_s;
  const double ratio = relu / x2;
  out.check(ratio >= 10.0, "ratio " + fmt("%.1f", ratio));
  out.detail = "Lat(ReLU)/Lat(X2act) at FI=56, IC=64 = " + fmt("%.1f", ratio);
  return out;
}

Outcome golden_values() {
  Outcome out;
  HardwareProfile hw;
  hw.t_bc = 0.0;
  auto close = [&](double got, double want, const char* name) {
    out.check(std::abs(got - want) <= 1e-12 * std::abs(want),
              std::string(name) + " = " + fmt("%.15g", got));
  };
  const auto m84 = LayerGeometry::from_map({4, 8, 8});
  const OtFlowTerms t = model_ot_flow(m84, hw);
  close(t.cmp2, 1.7408e-4, "CMP2");
  close(t.comm2, 1.6384e-5, "COMM2");
  close(model_ot_flow(LayerGeometry::from_map({1, 1, 1}), hw).cmp4,
        2.56125e-6, "CMP4");
  close(model_operator(OpKind::kX2act, m84, hw).latency_s, 2.688e-6,
        "Lat(X2act)");
  close(model_operator(OpKind::kAvgPool, m84, hw).latency_s, 6.4e-7,
        "Lat(AvgPool)");
  if (out.ok) out.detail = "5 values within 1e-12 relative";
  return out;
}

}  // namespace
}  // namespace pi2pc

int main(int argc, char** argv) {
  using namespace pi2pc;
  const std::string cli = argc > 1 ? argv[1] : PI2PC_CLI_PATH;
  struct Criterion {
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {"protocol correctness (exhaustive small ring)", protocol_correctness},
      {"end-to-end equivalence", [&] { return end_to_end(cli); }},
      {"cost-model fidelity", cost_model_fidelity},
      {"ReLU/X2act latency ratio", fig1_ratio},
      {"golden formula values", golden_values},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.ok = false;
      o.detail = std::string("exception: ") + e.what();
    }
    failed += !o.ok;
    std::cout << (o.ok ? "PASS " : "FAIL ") << c.name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
