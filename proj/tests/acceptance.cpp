// Copyright 2026 The hardfsm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 on any FAIL.
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <unistd.h>

#include "hardfsm/cli.hpp"
#include "hardfsm/coding.hpp"
#include "hardfsm/fault_engine.hpp"
#include "hardfsm/gf_ring.hpp"
#include "hardfsm/hardening.hpp"
#include "hardfsm/verilog.hpp"

using namespace hardfsm;
namespace fs = std::filesystem;

namespace {

const std::string kData = HARDFSM_TEST_DATA;
const std::string kReference = kData + "/controller14.json";

unsigned schoolbook(unsigned a, unsigned b) {
  unsigned prod = 0;
  for (unsigned i = 0; i < 8; ++i) {
    if ((b >> i) & 1u) prod ^= a << i;
  }
  for (int deg = 14; deg >= 8; --deg) {
    if ((prod >> deg) & 1u) prod ^= 0x105u << (deg - 8);
  }
  return prod;
}

struct Reference {
  HardenedDesign design;
  std::vector<InputFrame> frames;
  DesignParams params;
};

Reference reference(unsigned n, const std::string& file = kReference) {
  HardeningConfig cfg;
  cfg.protection_level = n;
  Reference r{harden(load_fsm(file), cfg), {}, {}};
  r.frames = encode_trace(r.design.codes, cover_trace(r.design.fsm));
  r.params = {r.design.codes.state.width(), r.design.layout.error_bits * r.design.layout.block_count,
              r.design.layout.block_count};
  return r;
}

std::vector<std::size_t> state_flops(const Netlist& n) {
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < n.flops().size(); ++i) {
    if (n.flops()[i].tag == StageTag::kStateReg) idx.push_back(i);
  }
  return idx;
}

std::string decode(const CodeBook& code, const std::vector<std::size_t>& flops, const std::vector<std::uint8_t>& s) {
  BitVector w(flops.size());
  for (std::size_t i = 0; i < flops.size(); ++i) w.set(i, s[flops[i]]);
  const auto hit = code.find(w);
  return hit ? code.entries()[*hit].first : "<invalid>";
}

// Bit offset of each output port in an output frame.
std::size_t port_offset(const Netlist& n, const std::string& name) {
  std::size_t off = 0;
  for (const auto& p : n.outputs()) {
    if (p.name == name) return off;
    off += p.bits.size();
  }
  throw Error("no output port " + name);
}

std::uint64_t port_value(const Netlist& n, const std::vector<std::uint8_t>& frame, const std::string& name) {
  const std::size_t off = port_offset(n, name);
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < n.output(name).bits.size(); ++i) v |= std::uint64_t{frame[off + i]} << i;
  return v;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int failures = 0;

void report(const std::string& id, const std::function<std::string()>& body) {
  const auto start = std::chrono::steady_clock::now();
  std::string detail;
  bool ok = false;
  try {
    detail = body();
    ok = detail.rfind("FAIL", 0) != 0;
    if (!ok) detail = detail.substr(std::min<std::size_t>(detail.size(), 5));
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!ok) ++failures;
  std::printf("%s %s: %s (%.2fs)\n", ok ? "PASS" : "FAIL", id.c_str(), detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fail(const std::string& why) { return "FAIL " + why; }

std::string c1_ring() {
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      const auto got = ring_mul(RingElem{static_cast<std::uint8_t>(a)}, RingElem{static_cast<std::uint8_t>(b)});
      if (got.value != schoolbook(a, b)) return fail("mismatch at " + std::to_string(a) + "*" + std::to_string(b));
    }
  }
  return "65536 products match the schoolbook oracle";
}

std::string c2_branch() {
  const MdsSpec& m = default_mds();
  const unsigned sweep = branch_number(m);
  if (sweep != 5) return fail("single-byte sweep gives " + std::to_string(sweep));
  const unsigned sampled = branch_number(m, 1'000'000, 7);
  if (sampled != 5) return fail("1e6 random samples give " + std::to_string(sampled));
  return "sweep = 5, 1e6 random inputs found nothing smaller";
}

std::string c3_distance() {
  std::size_t books = 0;
  for (unsigned n : {2u, 3u, 4u}) {
    for (std::size_t count : {4u, 8u, 14u, 32u}) {
      const auto code = generate_code(count, n, 1);
      const auto& e = code.entries();
      if (e.size() != count) return fail("wrong symbol count");
      for (std::size_t i = 0; i < e.size(); ++i) {
        for (std::size_t j = i + 1; j < e.size(); ++j) {
          std::size_t d = 0;
          for (std::size_t b = 0; b < code.width(); ++b) d += e[i].second.get(b) != e[j].second.get(b);
          if (d < n) return fail("N=" + std::to_string(n) + " count=" + std::to_string(count));
        }
      }
      ++books;
    }
  }
  return std::to_string(books) + " codebooks, all pairwise distances >= N";
}

std::string c4_modifiers() {
  const auto r = reference(2);
  const auto& d = r.design;
  if (d.plans.size() != 14) return fail(std::to_string(d.plans.size()) + " plans");
  const auto& m = default_mds().entries();
  for (const auto& plan : d.plans) {
    const auto words = pack_blocks(d.layout, plan.state_code, plan.control_code, plan.modifier);
    std::vector<std::uint32_t> outs;
    for (const auto v : words) {
      // Independent byte-level product.
      std::uint32_t out = 0;
      for (unsigned row = 0; row < 4; ++row) {
        unsigned acc = 0;
        for (unsigned col = 0; col < 4; ++col) acc ^= schoolbook(m[row][col].value, (v >> (8 * col)) & 0xffu);
        out |= acc << (8 * row);
      }
      if (out != mds_apply(default_mds(), v)) return fail("mds_apply disagrees with the byte oracle");
      outs.push_back(out);
    }
    for (std::size_t i = 0; i < d.layout.state_out.size(); ++i) {
      const auto s = d.layout.state_out[i];
      if (((outs[s.block] >> s.position) & 1u) != plan.next_code.get(i)) return fail("next-state bit mismatch");
    }
    for (const auto s : d.layout.error_slots()) {
      if (((outs[s.block] >> s.position) & 1u) != 1u) return fail("error bit not set");
    }
  }
  return "14 plans: next state and all-ones error bits exact";
}

std::string c5_bisimulation() {
  const auto r = reference(2);
  const auto& d = r.design;
  const Simulator sim(d.netlist);
  const auto flops = state_flops(d.netlist);
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const auto trace = random_trace(d.fsm, 1 + seed % 64, seed);
    const auto expect = simulate_spec(d.fsm, trace);
    const auto got = sim.run(encode_trace(d.codes, trace));
    for (std::size_t t = 0; t < got.states.size(); ++t) {
      if (decode(d.codes.state, flops, got.states[t]) != expect[t]) {
        return fail("trace " + std::to_string(seed) + " diverges at step " + std::to_string(t));
      }
    }
    for (std::size_t t = 0; t < trace.size(); ++t) {
      if (port_value(d.netlist, got.outputs[t], "fsm_alert") != 0) return fail("alert raised");
      const auto o = spec_outputs(d.fsm, d.fsm.state_index(expect[t]), trace[t]);
      for (const auto& decl : d.fsm.outputs) {
        const std::uint64_t want = o.count(decl.name) ? o.at(decl.name) : 0;
        if (port_value(d.netlist, got.outputs[t], decl.name) != want) return fail("output " + decl.name);
      }
    }
  }
  return "1000 traces, identical trajectories and outputs, alert 0";
}

std::string c6_inputs() {
  std::ostringstream msg;
  {
    const auto r = reference(2);
    CampaignSpec spec;
    spec.scope = FaultScope::kInputsOnly;
    const auto rep = run_campaign(r.design.netlist, r.frames, spec, r.design.codes.state, r.params);
    if (rep.hijack != 0) return fail("N=2 single flips: " + std::to_string(rep.hijack) + " hijacks");
    msg << "N=2 j=1: 0/" << rep.total << " (detected " << rep.detected << ")";
  }
  {
    const auto r = reference(3);
    CampaignSpec spec;
    spec.scope = FaultScope::kInputsOnly;
    spec.max_faults = 2;
    const auto rep = run_campaign(r.design.netlist, r.frames, spec, r.design.codes.state, r.params);
    if (rep.hijack != 0) return fail("N=3 double flips: " + std::to_string(rep.hijack) + " hijacks");
    msg << "; N=3 j<=2: 0/" << rep.total;
  }
  return msg.str();
}

std::string c7_diffusion() {
  const auto r = reference(2);
  CampaignSpec spec;
  spec.scope = FaultScope::kDiffusionOnly;
  const auto rep = run_campaign(r.design.netlist, r.frames, spec, r.design.codes.state, r.params);
  std::ostringstream msg;
  msg << rep.hijack << "/" << rep.total << " = " << 100.0 * rep.hijack_rate() << "% hijacks";
  if (rep.hijack_rate() >= 0.02) return fail(msg.str() + " (bound 2%)");
  // Replay through a fresh evaluator and through a plain faulty run.
  const FaultEvaluator ev(r.design.netlist, r.design.codes.state, r.frames);
  auto ws = ev.make_workspace();
  const Simulator sim(r.design.netlist);
  const auto flops = state_flops(r.design.netlist);
  for (const auto& w : rep.witnesses) {
    const auto again = ev.evaluate(w.faults, ws);
    if (again.outcome != Outcome::kHijack || again.cycle != w.result.cycle || again.reached != w.result.reached) {
      return fail("witness does not replay");
    }
    const auto full = sim.run(r.frames, w.faults);
    if (decode(r.design.codes.state, flops, full.states[w.result.cycle]) != w.result.reached) {
      return fail("witness does not replay in a full run");
    }
  }
  msg << ", " << rep.witnesses.size() << " witnesses replayed";
  return msg.str();
}

std::string c8_error_terminal() {
  const auto r = reference(2);
  const auto& d = r.design;
  const Netlist& n = d.netlist;
  const Simulator sim(n);
  const auto flops = state_flops(n);
  // Every single flip whose faulty run reaches ERROR is an entry point. (A flip
  // on the alert logic alone is detected without ever entering ERROR.)
  std::vector<FaultSite> entries;
  for (const NetId net : enumerate_fault_sites(n, FaultScope::kAll)) {
    for (std::size_t c = 0; c < r.frames.size(); ++c) {
      const FaultSite f{net, FaultEffect::kFlip, c};
      const auto res = sim.run(r.frames, std::span<const FaultSite>(&f, 1));
      for (const auto& st : res.states) {
        if (decode(d.codes.state, flops, st) == "ERROR") {
          entries.push_back(f);
          break;
        }
      }
    }
  }
  if (entries.empty()) return fail("no fault reaches ERROR");
  const std::size_t stride = std::max<std::size_t>(1, entries.size() / 25);
  std::size_t runs = 0;
  std::size_t used = 0;
  for (std::size_t e = 0; e < entries.size(); e += stride, ++used) {
    const FaultSite f = entries[e];
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::vector<InputFrame> frames(r.frames.begin(), r.frames.begin() + static_cast<std::ptrdiff_t>(*f.cycle + 1));
      const auto cont = encode_trace(d.codes, random_trace(d.fsm, 32, seed * 1000 + e));
      frames.insert(frames.end(), cont.begin(), cont.end());
      const auto res = sim.run(frames, std::span<const FaultSite>(&f, 1));
      std::size_t t = *f.cycle + 1;
      while (t < res.states.size() && decode(d.codes.state, flops, res.states[t]) != "ERROR") ++t;
      if (t >= res.states.size()) return fail("detected fault never reached ERROR");
      for (; t < res.states.size(); ++t) {
        if (decode(d.codes.state, flops, res.states[t]) != "ERROR") return fail("left ERROR");
        if (t < res.outputs.size() && port_value(n, res.outputs[t], "fsm_alert") != 1) return fail("alert dropped");
      }
      ++runs;
    }
  }
  return std::to_string(used) + " fault entries x 100 continuations (" + std::to_string(runs) +
         " runs) stay in ERROR with alert 1";
}

std::string c9_verilog() {
  const auto r = reference(2);
  const std::string text = emit_verilog(r.design.netlist);
  const Netlist back = parse_verilog(text);
  if (emit_verilog(back) != text) return fail("re-emission differs");
  const Simulator a(r.design.netlist);
  const Simulator b(back);
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto frames = encode_trace(r.design.codes, random_trace(r.design.fsm, 48, seed));
    const auto x = a.run(frames);
    const auto y = b.run(frames);
    if (x.states != y.states || x.outputs != y.outputs) return fail("trace " + std::to_string(seed) + " differs");
  }
  return "100 traces identical after emit/parse";
}

std::string c10_determinism() {
  const fs::path root = fs::temp_directory_path() / ("hardfsm_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(root);
  std::ostringstream sink;
  for (const char* run : {"a", "b"}) {
    const std::string dir = (root / run).string();
    if (run_cli({"harden", "--fsm", kReference, "--level", "2", "--seed", "5", "--out", dir}, sink, sink) != 0) {
      return fail("harden failed");
    }
    run_cli({"inject", "--netlist", dir + "/netlist.json", "--scope", "all", "--exhaustive", "--out",
             dir + "/all.json"},
            sink, sink);
    run_cli({"inject", "--netlist", dir + "/netlist.json", "--scope", "all", "--max-faults", "2", "--sample", "20000",
             "--seed", "9", "--threads", "2", "--out", dir + "/pairs.json"},
            sink, sink);
  }
  std::size_t files = 0;
  for (const char* f : {"netlist.json", "netlist.v", "codebook.json", "hardening_report.json", "all.json",
                        "pairs.json"}) {
    const std::string x = slurp(root / "a" / f);
    if (x.empty() || x != slurp(root / "b" / f)) {
      fs::remove_all(root);
      return fail(std::string(f) + " differs");
    }
    ++files;
  }
  fs::remove_all(root);
  return std::to_string(files) + " artifacts byte-identical across two runs";
}

std::string gate_monotonicity() {
  std::ostringstream msg;
  for (const char* f : {"/controller14.json", "/branch_merge.json", "/seq3.kiss2"}) {
    std::size_t prev = 0;
    msg << (msg.tellp() ? "; " : "") << fs::path(f).stem().string() << ":";
    for (unsigned n : {2u, 3u, 4u}) {
      HardeningConfig cfg;
      cfg.protection_level = n;
      const auto counts = gate_counts(harden(load_fsm(kData + f), cfg).netlist);
      const auto total = counts["total"].get<std::size_t>();
      msg << " " << total;
      if (total < prev) return fail(msg.str() + " decreases");
      prev = total;
    }
  }
  return "gate totals at N=2,3,4 " + msg.str();
}

}  // namespace

int main() {
  report("C1 ring arithmetic", c1_ring);
  report("C2 branch number", c2_branch);
  report("C3 encoding distance", c3_distance);
  report("C4 modifier equations", c4_modifiers);
  report("C5 bisimulation", c5_bisimulation);
  report("C6 input-fault immunity", c6_inputs);
  report("C7 diffusion campaign", c7_diffusion);
  report("C8 ERROR terminality", c8_error_terminal);
  report("C9 Verilog round trip", c9_verilog);
  report("C10 determinism", c10_determinism);
  report("gate-count monotonicity", gate_monotonicity);
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
