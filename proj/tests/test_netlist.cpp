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

#include <random>

#include "doctest.h"
#include "hardfsm/netlist.hpp"

using namespace hardfsm;

namespace {

// 2-bit counter with enable: q0' = q0 ^ en, q1' = q1 ^ (q0 & en); out = q1 & q0.
Netlist counter() {
  Netlist n("counter");
  const auto en = n.add_input("en", 1);
  const NetId q0 = n.add_net("q0");
  const NetId q1 = n.add_net("q1");
  const NetId d0 = n.add_gate(GateKind::kXor, {q0, en[0]}, StageTag::kDiffusion, "d0");
  const NetId c = n.add_gate(GateKind::kAnd, {q0, en[0]}, StageTag::kMatch, "carry");
  const NetId d1 = n.add_gate(GateKind::kXor, {q1, c}, StageTag::kDiffusion, "d1");
  const NetId all = n.add_gate(GateKind::kAnd, {q1, q0}, StageTag::kOutput, "all");
  n.add_gate(GateKind::kConst0, {}, StageTag::kMix, "zero");
  n.add_flop(d0, q0, false, StageTag::kStateReg);
  n.add_flop(d1, q1, false, StageTag::kStateReg);
  n.add_output("full", {all});
  n.levelize();
  return n;
}

unsigned counter_value(const std::vector<std::uint8_t>& s) { return s[0] | (s[1] << 1); }

std::vector<InputFrame> ones(std::size_t n) { return std::vector<InputFrame>(n, InputFrame{1}); }

}  // namespace

TEST_CASE("golden simulation of a counter") {
  const Netlist n = counter();
  const Simulator sim(n);
  const auto r = sim.run(ones(5));
  REQUIRE(r.states.size() == 6);
  REQUIRE(r.outputs.size() == 5);
  for (unsigned t = 0; t <= 5; ++t) CHECK(counter_value(r.states[t]) == t % 4);
  CHECK(r.outputs[3][0] == 1);
  CHECK(r.outputs[2][0] == 0);
  // Idempotent.
  CHECK(sim.run(ones(5)).states == r.states);
}

TEST_CASE("gate kinds evaluate per truth table") {
  for (auto kind : {GateKind::kXor, GateKind::kAnd, GateKind::kOr, GateKind::kMux, GateKind::kNot, GateKind::kBuf}) {
    Netlist n("g");
    const auto in = n.add_input("i", 3);
    std::vector<NetId> args;
    const std::size_t arity = kind == GateKind::kMux ? 3 : (kind == GateKind::kNot || kind == GateKind::kBuf) ? 1 : 2;
    for (std::size_t k = 0; k < arity; ++k) args.push_back(in[k]);
    const NetId o = n.add_gate(kind, args, StageTag::kNone, "o");
    n.add_output("y", {o});
    const Simulator sim(n);
    for (unsigned v = 0; v < 8; ++v) {
      const std::uint8_t a = v & 1, b = (v >> 1) & 1, c = (v >> 2) & 1;
      std::uint8_t want = 0;
      switch (kind) {
        case GateKind::kXor: want = a ^ b; break;
        case GateKind::kAnd: want = a & b; break;
        case GateKind::kOr: want = a | b; break;
        case GateKind::kMux: want = a ? c : b; break;
        case GateKind::kNot: want = a ^ 1; break;
        default: want = a; break;
      }
      std::vector<InputFrame> frame{{a, b, c}};
      CHECK(sim.run(frame).outputs[0][0] == want);
    }
  }
}

TEST_CASE("structural checks") {
  SUBCASE("two drivers") {
    Netlist n;
    const auto in = n.add_input("a", 1);
    const NetId x = n.add_gate(GateKind::kNot, {in[0]}, StageTag::kNone, "x");
    n.add_gate_driving(GateKind::kBuf, {in[0]}, x, StageTag::kNone);
    CHECK_THROWS_AS(n.levelize(), Error);
  }
  SUBCASE("combinational loop") {
    Netlist n;
    const NetId a = n.add_net("a");
    const NetId b = n.add_gate(GateKind::kNot, {a}, StageTag::kNone, "b");
    n.add_gate_driving(GateKind::kBuf, {b}, a, StageTag::kNone);
    try {
      n.levelize();
      FAIL("expected a cycle error");
    } catch (const Error& e) {
      CHECK(std::string(e.what()).find("cycle") != std::string::npos);
    }
  }
  SUBCASE("undriven net") {
    Netlist n;
    const NetId a = n.add_net("floating");
    n.add_output("y", {n.add_gate(GateKind::kNot, {a}, StageTag::kNone, "y_n")});
    CHECK_THROWS_AS(n.levelize(), Error);
  }
  SUBCASE("arity and references") {
    Netlist n;
    CHECK_THROWS_AS(n.add_gate(GateKind::kXor, {0}, StageTag::kNone, "x"), Error);
    CHECK_THROWS_AS(n.add_gate(GateKind::kNot, {42}, StageTag::kNone, "x"), Error);
  }
  SUBCASE("port collisions") {
    Netlist n;
    const NetId a = n.add_gate(GateKind::kConst1, {}, StageTag::kNone, "y");
    CHECK_THROWS_AS(n.add_output("y", {a}), Error);
    n.add_output("z", {a});
    CHECK_THROWS_AS(n.add_output("z", {a}), Error);
  }
}

TEST_CASE("net names are sanitized and unique") {
  Netlist n;
  const NetId a = n.add_net("bad name!");
  const NetId b = n.add_net("bad name!");
  CHECK(n.net_name(a) == "bad_name_");
  CHECK(n.net_name(b) != n.net_name(a));
  CHECK(n.net_name(n.add_net("module")) != "module");
  CHECK(n.net_name(n.add_net("9lives")) == "n_9lives");
}

TEST_CASE("transient flip acts in one cycle only") {
  const Netlist n = counter();
  const Simulator sim(n);
  // Flip d0 in cycle 1: q0 stays 1 while the carry still reaches q1, so the
  // counter jumps 1 -> 3 and then keeps counting.
  const FaultSite f{*n.find_net("d0"), FaultEffect::kFlip, 1};
  const auto r = sim.run(ones(4), std::vector<FaultSite>{f});
  CHECK(counter_value(r.states[1]) == 1);
  CHECK(counter_value(r.states[2]) == 3);
  CHECK(counter_value(r.states[3]) == 0);
  CHECK(counter_value(r.states[4]) == 1);
}

TEST_CASE("two flips on one net cancel") {
  const Netlist n = counter();
  const Simulator sim(n);
  const FaultSite f{*n.find_net("d0"), FaultEffect::kFlip, 1};
  CHECK(sim.run(ones(4), std::vector<FaultSite>{f, f}).states == sim.run(ones(4)).states);
}

TEST_CASE("flip on a flop output perturbs one cycle of logic") {
  const Netlist n = counter();
  const Simulator sim(n);
  const FaultSite f{*n.find_net("q1"), FaultEffect::kFlip, 0};
  const auto r = sim.run(ones(3), std::vector<FaultSite>{f});
  // q1 reads 1 in cycle 0, so d1 = 1 ^ 0 = 1 and the counter jumps to 3.
  CHECK(counter_value(r.states[1]) == 3);
}

TEST_CASE("stuck-at faults hold from their onset") {
  const Netlist n = counter();
  const Simulator sim(n);
  const FaultSite s{*n.find_net("d0"), FaultEffect::kStuck0, 2};
  const auto r = sim.run(ones(6), std::vector<FaultSite>{s});
  CHECK(counter_value(r.states[2]) == 2);
  for (std::size_t t = 3; t <= 6; ++t) CHECK(r.states[t][0] == 0);
  const FaultSite s1{*n.find_net("q0"), FaultEffect::kStuck1, std::nullopt};
  const auto r1 = sim.run(ones(3), std::vector<FaultSite>{s1});
  CHECK(r1.outputs[1][0] == r1.states[1][1]);
}

TEST_CASE("stuck-at-0 on a constant-0 net changes nothing") {
  const Netlist n = counter();
  const Simulator sim(n);
  const FaultSite f{*n.find_net("zero"), FaultEffect::kStuck0, 0};
  const auto faulty = sim.run(ones(8), std::vector<FaultSite>{f});
  const auto golden = sim.run(ones(8));
  CHECK(faulty.states == golden.states);
  CHECK(faulty.outputs == golden.outputs);
}

TEST_CASE("unknown fault location and bad frames are rejected") {
  const Netlist n = counter();
  const Simulator sim(n);
  CHECK_THROWS_AS(sim.run(ones(2), std::vector<FaultSite>{{9999, FaultEffect::kFlip, 0}}), Error);
  std::vector<InputFrame> wrong{{1, 0}};
  CHECK_THROWS_AS(sim.run(wrong), Error);
}

TEST_CASE("fault site enumeration by scope") {
  const Netlist n = counter();
  CHECK(enumerate_fault_sites(n, FaultScope::kAll).size() == n.gates().size() + n.flops().size());
  const auto diff = enumerate_fault_sites(n, FaultScope::kDiffusionOnly);
  CHECK(diff == std::vector<NetId>{*n.find_net("d0"), *n.find_net("d1")});
  // Only ports ending in _e count as encoded inputs.
  CHECK(enumerate_fault_sites(n, FaultScope::kInputsOnly) == std::vector<NetId>{*n.find_net("q0"), *n.find_net("q1")});
  CHECK(fault_scope_from_string("inputs") == FaultScope::kInputsOnly);
  CHECK(fault_scope_from_string("diffusion") == FaultScope::kDiffusionOnly);
  CHECK_THROWS_AS(fault_scope_from_string("everything"), Error);
  CHECK(fault_effect_from_string("stuck1") == FaultEffect::kStuck1);
  CHECK_THROWS_AS(fault_effect_from_string("melt"), Error);
}

TEST_CASE("netlist JSON round trip") {
  const Netlist n = counter();
  const auto j = n.to_json();
  const Netlist again = Netlist::from_json(nlohmann::ordered_json::parse(j.dump()));
  CHECK(again.to_json() == j);
  CHECK(Simulator(again).run(ones(7)).states == Simulator(n).run(ones(7)).states);
  for (const auto& g : j["gates"]) CHECK(g.contains("tag"));
  auto broken = j;
  broken["gates"][0]["in"][0] = "nowhere";
  CHECK_THROWS_AS(Netlist::from_json(broken), Error);
  auto bad_kind = j;
  bad_kind["gates"][0]["kind"] = "NAND";
  CHECK_THROWS_AS(Netlist::from_json(bad_kind), Error);
}

TEST_CASE("step-wise simulation matches run") {
  const Netlist n = counter();
  const Simulator sim(n);
  std::mt19937 rng(2);
  std::vector<InputFrame> trace;
  for (int i = 0; i < 20; ++i) trace.push_back({static_cast<std::uint8_t>(rng() & 1)});
  const auto r = sim.run(trace);
  auto ws = sim.make_workspace();
  auto state = sim.reset_state();
  std::vector<std::uint8_t> out;
  std::vector<std::uint8_t> next;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    sim.step(ws, state, trace[t], {}, t, out, next);
    CHECK(out == r.outputs[t]);
    state = next;
    CHECK(state == r.states[t + 1]);
  }
}
