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

// pi2pc command line: run a party, run the dealer, build latency tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "pi2pc/cost_model.hpp"
#include "pi2pc/error.hpp"
#include "pi2pc/graph.hpp"
#include "pi2pc/model_zoo.hpp"
#include "pi2pc/runtime.hpp"
#include "pi2pc/transport.hpp"

namespace {

using namespace pi2pc;

constexpr int kExitAbort = 2;
constexpr int kExitConfig = 3;

struct RunArgs {
  std::string role = "server1";
  std::string graph, hw, weights, input, mode = "loopback";
  std::string listen, connect, corr, report;
  uint64_t seed = 1;
  size_t count = 0;
};

std::pair<std::string, uint16_t> split_endpoint(const std::string& s) {
  const auto colon = s.rfind(':');
  const std::string host = colon == std::string::npos ? "" : s.substr(0, colon);
  const std::string port = colon == std::string::npos ? s : s.substr(colon + 1);
  try {
    const unsigned long p = std::stoul(port);
    if (p == 0 || p > 65535) throw std::out_of_range("port");
    return {host.empty() ? "127.0.0.1" : host, uint16_t(p)};
  } catch (const std::logic_error&) {
    throw ConfigError("bad endpoint '" + s + "', expected host:port");
  }
}

HardwareProfile load_hw(const std::string& path) {
  return path.empty() ? HardwareProfile{} : HardwareProfile::load(path);
}

std::string corr_path(const std::string& prefix, PartyId p) {
  return prefix + (p == PartyId::kS0 ? ".s0.pcr" : ".s1.pcr");
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream os(path);
  if (!os) throw ConfigError("cannot write " + path);
  os << text;
}

void emit(const RunReport& r, const std::string& report_path) {
  std::cout << report_render(r, ReportFormat::kTable);
  if (!r.logits.empty()) {
    const auto last = fp_decode(r.logits.back());
    std::cout << "logits[" << r.logits.size() - 1 << "]:";
    for (double v : last) std::printf(" %.4f", v);
    std::cout << "\n";
  }
  std::cout << "transcript " << r.transcript_digest << "\n";
  if (!report_path.empty()) {
    write_text(report_path, report_render(r, ReportFormat::kJson));
  }
}

int run_dealer(const RunArgs& a, const GraphSpec& g) {
  if (a.corr.empty()) throw ConfigError("dealer needs --corr <prefix>");
  size_t count = a.count;
  if (count == 0 && !a.input.empty()) count = load_inputs(a.input, g).size();
  if (count == 0) throw ConfigError("dealer needs --count or --input");
  StreamPair streams = deal_inference(g, count, dealer_rng(a.seed));
  streams.s0.save(corr_path(a.corr, PartyId::kS0));
  streams.s1.save(corr_path(a.corr, PartyId::kS1));
  std::cout << "dealt " << count << " inference(s): "
            << corr_path(a.corr, PartyId::kS0) << ", "
            << corr_path(a.corr, PartyId::kS1) << "\n";
  return 0;
}

int run_command(const RunArgs& a) {
  const GraphSpec g = load_graph(a.graph);
  if (a.role == "dealer") return run_dealer(a, g);
  const HardwareProfile hw = load_hw(a.hw);
  const PartyId party =
      a.role == "server0" ? PartyId::kS0 : PartyId::kS1;

  if (a.mode == "loopback") {
    if (a.weights.empty() || a.input.empty()) {
      throw ConfigError("loopback mode runs both servers and needs --weights "
                        "and --input");
    }
    auto [r0, r1] = run_loopback(g, hw, load_weights(a.weights, g),
                                 load_inputs(a.input, g), a.seed);
    emit(party == PartyId::kS0 ? r0 : r1, a.report);
    return 0;
  }

  if (a.corr.empty()) {
    throw ConfigError("tcp mode needs --corr <prefix> from a dealer run");
  }
  std::vector<RingTensor> weights, inputs;
  if (party == PartyId::kS0) {
    if (a.weights.empty()) throw ConfigError("server0 needs --weights");
    weights = load_weights(a.weights, g);
  } else {
    if (a.input.empty()) throw ConfigError("server1 needs --input");
    inputs = load_inputs(a.input, g);
  }
  CorrelatedStream corr = CorrelatedStream::load(corr_path(a.corr, party));
  if (corr.party() != party) {
    throw ConfigError("correlated randomness file belongs to the other party");
  }
  const SimParams sim = SimParams::from_env(hw.sim());
  std::unique_ptr<Channel> ch;
  if (!a.listen.empty()) {
    ch = tcp_listen(split_endpoint(a.listen).second, 1, sim);
  } else if (!a.connect.empty()) {
    const auto [host, port] = split_endpoint(a.connect);
    ch = tcp_connect(host, port, 1, sim);
  } else {
    throw ConfigError("tcp mode needs --listen or --connect");
  }
  const RunReport r =
      run_party(party, g, hw, *ch, corr, weights, inputs, a.seed);
  emit(r, a.report);
  return 0;
}

int lut_command(const std::string& graph, const std::string& hw,
                const std::string& out) {
  const LatencyTable t = build_lut(load_graph(graph), load_hw(hw));
  export_lut(t, out);
  std::cout << t.entries.size() << " entries, total "
            << t.total_latency() << " s -> " << out << "\n";
  return 0;
}

int make_example(const std::string& dir, size_t count, uint64_t seed) {
  std::filesystem::create_directories(dir);
  const GraphSpec g = reference_cnn();
  write_text(dir + "/graph.json", graph_to_json(g) + "\n");
  write_text(dir + "/hw.json", HardwareProfile{}.to_json() + "\n");
  save_weights(dir + "/weights.bin", random_weights(g, seed));
  save_inputs(dir + "/input.bin", random_inputs(g, count, seed));
  std::cout << "wrote graph.json, hw.json, weights.bin, input.bin (" << count
            << " inputs) to " << dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-server private inference with OT-based comparisons"};
  app.require_subcommand(1);

  RunArgs ra;
  auto* run = app.add_subcommand("run", "run a server or the dealer");
  run->add_option("--role", ra.role, "server0, server1 or dealer")
      ->check(CLI::IsMember({"server0", "server1", "dealer"}));
  run->add_option("--graph", ra.graph, "graph JSON")->required();
  run->add_option("--hw", ra.hw, "hardware profile JSON");
  run->add_option("--weights", ra.weights, "weights file (server0)");
  run->add_option("--input", ra.input, "input tensor [N,C,H,W] (server1)");
  run->add_option("--mode", ra.mode, "loopback or tcp")
      ->check(CLI::IsMember({"loopback", "tcp"}));
  run->add_option("--listen", ra.listen, "[host:]port to accept the peer on");
  run->add_option("--connect", ra.connect, "host:port of the peer");
  run->add_option("--corr", ra.corr,
                  "correlated randomness prefix (<prefix>.s0.pcr/.s1.pcr)");
  run->add_option("--count", ra.count, "inferences to deal for (dealer)");
  run->add_option("--seed", ra.seed, "run seed");
  run->add_option("--report", ra.report, "write the JSON report here");

  std::string lut_graph, lut_hw, lut_out;
  auto* lut = app.add_subcommand("lut", "build the latency lookup table");
  lut->add_option("--graph", lut_graph, "graph JSON")->required();
  lut->add_option("--hw", lut_hw, "hardware profile JSON");
  lut->add_option("--out", lut_out, "output LUT JSON")->required();

  std::string ex_dir;
  size_t ex_count = 4;
  uint64_t ex_seed = 1;
  auto* ex = app.add_subcommand("make-example",
                                "write the reference CNN and random data");
  ex->add_option("--out-dir", ex_dir, "output directory")->required();
  ex->add_option("--count", ex_count, "number of inputs");
  ex->add_option("--seed", ex_seed, "data seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  try {
    if (*run) return run_command(ra);
    if (*lut) return lut_command(lut_graph, lut_hw, lut_out);
    if (*ex) return make_example(ex_dir, ex_count, ex_seed);
  } catch (const ProtocolAbort& e) {
    std::cerr << "protocol abort: " << e.what() << "\n";
    return kExitAbort;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
