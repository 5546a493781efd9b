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

#include <set>
#include <string>

#include "doctest.h"
#include "hardfsm/fsm.hpp"

using namespace hardfsm;

namespace {

const std::string kData = HARDFSM_TEST_DATA;

std::string error_of(const std::string& src, FsmFormat f) {
  try {
    parse_fsm(src, f);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("JSON FSM loads with declared reset and Moore outputs") {
  const auto fsm = load_fsm(kData + "/toggle.json");
  CHECK(fsm.name == "toggle");
  CHECK(fsm.states == std::vector<std::string>{"OFF", "ON"});
  CHECK(fsm.reset_state == "OFF");
  CHECK(fsm.inputs.size() == 1);
  CHECK(fsm.transitions.size() == 2);
  std::vector<Assignment> trace{{{"t", 1}}, {{"t", 0}}, {{"t", 1}}};
  CHECK(simulate_spec(fsm, trace) == std::vector<std::string>{"OFF", "ON", "ON", "OFF"});
  CHECK(spec_outputs(fsm, fsm.state_index("ON"), {{"t", 0}}).at("lamp") == 1);
}

TEST_CASE("KISS2 FSM loads and simulates") {
  const auto fsm = load_fsm(kData + "/seq3.kiss2");
  CHECK(fsm.states == std::vector<std::string>{"A", "B", "C"});
  CHECK(fsm.reset_state == "A");
  REQUIRE(fsm.inputs.size() == 1);
  CHECK(fsm.inputs[0].name == "i0");
  std::vector<Assignment> trace{{{"i0", 1}}, {{"i0", 1}}, {{"i0", 1}}, {{"i0", 0}}};
  CHECK(simulate_spec(fsm, trace) == std::vector<std::string>{"A", "B", "C", "C", "A"});
  CHECK(spec_outputs(fsm, fsm.state_index("C"), {{"i0", 1}}).at("o0") == 1);
  CHECK(spec_outputs(fsm, fsm.state_index("C"), {{"i0", 0}}).at("o0") == 0);
}

TEST_CASE("KISS2 state count overflow names the unknown state and its line") {
  try {
    load_fsm(kData + "/bad_state.kiss2");
    FAIL("expected an error");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("unknown state") != std::string::npos);
    CHECK(msg.find("S9") != std::string::npos);
    CHECK(msg.find("kiss2:9:") != std::string::npos);
  }
}

TEST_CASE("KISS2 syntax errors carry line and column") {
  const std::string msg = error_of(".i 1\n.o 1\n.bogus\n", FsmFormat::kKiss2);
  CHECK(msg.find("kiss2:3:1:") != std::string::npos);
  CHECK(error_of(".i 1\n.o 1\n10 A B 0\n", FsmFormat::kKiss2).find("kiss2:3:") != std::string::npos);
}

TEST_CASE("JSON syntax errors carry line and column") {
  const std::string msg = error_of("{\n  \"states\": [\"A\",]\n}", FsmFormat::kJson);
  CHECK(msg.find("json:2:") != std::string::npos);
}

TEST_CASE("missing FSM file is a filesystem error") {
  CHECK_THROWS_AS(load_fsm(kData + "/does_not_exist.json"), std::filesystem::filesystem_error);
}

TEST_CASE("validation rejects bad descriptions") {
  const auto base = [](const std::string& transitions, const std::string& extra = "") {
    return R"({"states": ["A", "B"], "inputs": ["x"], "transitions": [)" + transitions + "]" + extra + "}";
  };
  SUBCASE("overlapping guards") {
    const auto msg = error_of(base(R"({"from":"A","guard":{"x":1},"to":"A"},{"from":"A","guard":{"x":1},"to":"B"})"),
                              FsmFormat::kJson);
    CHECK(msg.find("nondetermin") != std::string::npos);
  }
  SUBCASE("unknown state") {
    CHECK_THROWS_AS(parse_fsm(base(R"({"from":"A","to":"Z"})"), FsmFormat::kJson), Error);
  }
  SUBCASE("unknown signal") {
    CHECK_THROWS_AS(parse_fsm(base(R"({"from":"A","guard":{"y":1},"to":"B"})"), FsmFormat::kJson), Error);
  }
  SUBCASE("value out of range") {
    CHECK_THROWS_AS(parse_fsm(base(R"({"from":"A","guard":{"x":2},"to":"B"})"), FsmFormat::kJson), Error);
  }
  SUBCASE("two default edges") {
    CHECK_THROWS_AS(parse_fsm(base(R"({"from":"A","to":"B"},{"from":"A","to":"A"})"), FsmFormat::kJson), Error);
  }
  SUBCASE("reserved names") {
    CHECK_THROWS_AS(parse_fsm(R"({"states": ["ERROR"]})", FsmFormat::kJson), Error);
    CHECK_THROWS_AS(parse_fsm(R"({"states": ["A"], "inputs": ["state_e"]})", FsmFormat::kJson), Error);
    CHECK_THROWS_AS(parse_fsm(R"({"states": ["A"], "inputs": ["go_e"]})", FsmFormat::kJson), Error);
    CHECK_THROWS_AS(parse_fsm(R"({"states": ["A"], "outputs": ["fsm_alert"]})", FsmFormat::kJson), Error);
  }
  SUBCASE("reset must be a state") {
    CHECK_THROWS_AS(parse_fsm(R"({"states": ["A"], "reset": "B"})", FsmFormat::kJson), Error);
  }
}

TEST_CASE("unreachable and incomplete states produce warnings") {
  const auto fsm = parse_fsm(R"({"states": ["A", "B", "C"], "inputs": ["x"], "complete": true,
    "transitions": [{"from":"A","guard":{"x":1},"to":"B"}]})",
                             FsmFormat::kJson);
  bool unreachable = false;
  for (const auto& w : fsm.warnings) unreachable = unreachable || w.find("'C'") != std::string::npos;
  CHECK(unreachable);
}

TEST_CASE("single-state machines are accepted with a warning") {
  const auto fsm = parse_fsm(R"({"states": ["S"], "inputs": ["a"], "transitions": [{"from":"S","to":"S"}]})",
                             FsmFormat::kJson);
  REQUIRE(fsm.warnings.size() == 1);
  CHECK(fsm.warnings[0].find("single-state") != std::string::npos);
  CHECK(simulate_spec(fsm, random_trace(fsm, 5, 1)).back() == "S");
}

TEST_CASE("CFG of the branch/merge machine has 4 explicit and 3 implicit edges") {
  const auto fsm = load_fsm(kData + "/branch_merge.json");
  const auto edges = extract_cfg(fsm);
  REQUIRE(edges.size() == 7);
  std::size_t implicit = 0;
  for (const auto& e : edges) {
    if (e.implicit()) {
      ++implicit;
      CHECK(e.from == e.to);
    }
  }
  CHECK(implicit == 3);
  // Both S1 and S2 lead to S3.
  std::set<std::size_t> into_s3;
  for (const auto& e : edges) {
    if (e.to == fsm.state_index("S3") && !e.implicit()) into_s3.insert(e.from);
  }
  CHECK(into_s3 == std::set<std::size_t>{fsm.state_index("S1"), fsm.state_index("S2")});

  std::vector<Assignment> trace{{{"x0", 1}, {"x1", 0}, {"x2", 0}}, {{"x0", 0}, {"x1", 0}, {"x2", 1}}};
  CHECK(simulate_spec(fsm, trace) == std::vector<std::string>{"S0", "S1", "S3"});
}

TEST_CASE("without completion an uncovered input has no edge") {
  const auto fsm = parse_fsm(R"({"states": ["A", "B"], "inputs": ["x"], "complete": false,
    "transitions": [{"from":"A","guard":{"x":1},"to":"B"},{"from":"B","to":"A"}]})",
                             FsmFormat::kJson);
  const auto edges = extract_cfg(fsm);
  CHECK(edges.size() == 2);
  CHECK_FALSE(fire(fsm, edges, 0, {{"x", 0}}).has_value());
  const auto configs = enumerate_configurations(fsm, edges);
  std::size_t dead = 0;
  for (const auto& c : configs) dead += !c.edge.has_value();
  CHECK(dead == 1);
  std::vector<Assignment> trace{{{"x", 0}}};
  CHECK_THROWS_AS(simulate_spec(fsm, trace), Error);
}

TEST_CASE("reference controller has 14 fully specified configurations") {
  const auto fsm = load_fsm(kData + "/controller14.json");
  const auto edges = extract_cfg(fsm);
  CHECK(edges.size() == 14);
  const auto configs = enumerate_configurations(fsm, edges);
  CHECK(configs.size() == 14);
  std::set<std::size_t> fired;
  for (const auto& c : configs) {
    REQUIRE(c.edge.has_value());
    fired.insert(*c.edge);
  }
  CHECK(fired.size() == 14);
}

TEST_CASE("edge-covering trace fires every reachable configuration") {
  // Reset is reachable from every state of these, so one walk covers everything.
  for (const char* file : {"/controller14.json", "/toggle.json", "/seq3.kiss2"}) {
    const auto fsm = load_fsm(kData + file);
    const auto edges = extract_cfg(fsm);
    const auto configs = enumerate_configurations(fsm, edges);
    const auto trace = cover_trace(fsm);
    const auto states = simulate_spec(fsm, trace);
    std::set<std::pair<std::size_t, std::size_t>> seen;  // (state, edge)
    for (std::size_t t = 0; t < trace.size(); ++t) {
      const std::size_t s = fsm.state_index(states[t]);
      seen.insert({s, *fire(fsm, edges, s, trace[t])});
    }
    // Every configuration reachable from reset appears; all states here are reachable.
    for (const auto& c : configs) {
      if (c.edge) CHECK(seen.count({c.state, *c.edge}) == 1);
    }
  }
}

TEST_CASE("edge-covering trace with an absorbing state") {
  // S3 has no way back, so only one of the S1/S2 branches can be walked. The
  // walk should still exhaust S0 before leaving and end in S3.
  const auto fsm = load_fsm(kData + "/branch_merge.json");
  const auto edges = extract_cfg(fsm);
  const auto configs = enumerate_configurations(fsm, edges);
  const auto trace = cover_trace(fsm);
  const auto states = simulate_spec(fsm, trace);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const std::size_t s = fsm.state_index(states[t]);
    seen.insert({s, *fire(fsm, edges, s, trace[t])});
  }
  const std::size_t s0 = fsm.state_index("S0");
  std::set<std::size_t> exits;
  for (const auto& c : configs) {
    if (c.state != s0) continue;
    if (edges[*c.edge].to == s0) CHECK(seen.count({c.state, *c.edge}) == 1);
    if (edges[*c.edge].to != s0 && seen.count({c.state, *c.edge})) exits.insert(*c.edge);
  }
  CHECK(exits.size() == 1);
  CHECK(states.back() == "S3");
  CHECK(seen.count({fsm.state_index("S3"), *fire(fsm, edges, fsm.state_index("S3"), trace.back())}) == 1);
}

TEST_CASE("random traces are reproducible and assign every input") {
  const auto fsm = load_fsm(kData + "/controller14.json");
  const auto a = random_trace(fsm, 20, 4);
  const auto b = random_trace(fsm, 20, 4);
  CHECK(a == b);
  CHECK(a != random_trace(fsm, 20, 5));
  for (const auto& step : a) CHECK(step.size() == fsm.inputs.size());
}

TEST_CASE("JSON round trip preserves the machine") {
  const auto fsm = load_fsm(kData + "/controller14.json");
  const auto again = parse_fsm(to_json(fsm).dump(), FsmFormat::kJson);
  CHECK(to_json(again) == to_json(fsm));
  const auto trace = random_trace(fsm, 50, 1);
  CHECK(simulate_spec(again, trace) == simulate_spec(fsm, trace));
}
