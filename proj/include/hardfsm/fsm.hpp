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

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hardfsm/bits.hpp"
#include "json.hpp"

namespace hardfsm {

struct SignalDecl {
  std::string name;
  unsigned width = 1;
};

struct Literal {
  std::string signal;
  std::uint64_t value = 0;

  friend bool operator==(const Literal&, const Literal&) = default;
};

// Conjunction of literals; the empty conjunction is the default (else) edge.
struct ControlPredicate {
  std::vector<Literal> literals;

  bool is_default() const { return literals.empty(); }
  std::string to_string() const;
};

// Values for control signals (or outputs), keyed by signal name.
using Assignment = std::map<std::string, std::uint64_t>;

bool matches(const ControlPredicate& guard, const Assignment& inputs);

struct Transition {
  std::string from;
  ControlPredicate guard;
  std::string to;
  Assignment outputs;  // Mealy outputs; empty for Moore machines
};

struct FsmSpec {
  std::string name;
  std::vector<std::string> states;
  std::string reset_state;
  std::vector<SignalDecl> inputs;
  std::vector<SignalDecl> outputs;
  std::vector<Transition> transitions;
  std::map<std::string, Assignment> state_outputs;  // Moore outputs
  // When set, a state whose guards do not cover the input space falls back to
  // an implicit self-loop; otherwise uncovered inputs are treated as invalid.
  bool complete_with_self_loops = true;
  std::vector<std::string> warnings;

  std::size_t state_index(std::string_view state) const;
  std::size_t input_index(std::string_view signal) const;
  const SignalDecl& input(std::string_view signal) const { return inputs[input_index(signal)]; }
};

enum class FsmFormat { kKiss2, kJson };

// Parses and validates. Throws hardfsm::Error with line information for KISS2
// syntax problems, and for unknown references or overlapping guards.
FsmSpec parse_fsm(std::string_view source, FsmFormat format);
// Format chosen from the extension: .kiss2/.kiss → KISS2, otherwise JSON.
FsmSpec load_fsm(const std::filesystem::path& path);

// Checks reset membership, references, guard value ranges and determinism.
// Appends reachability and completeness warnings to fsm.warnings.
void validate(FsmSpec& fsm);

nlohmann::ordered_json to_json(const FsmSpec& fsm);

struct CfgEdge {
  std::size_t from;  // state index
  ControlPredicate guard;
  std::size_t to;
  // Index into FsmSpec::transitions, or nullopt for an implicit self-loop.
  std::optional<std::size_t> transition;

  bool implicit() const { return !transition.has_value(); }
};

// Explicit transitions in source order followed by one implicit self-loop per
// state whose guards leave part of the input space uncovered.
std::vector<CfgEdge> extract_cfg(const FsmSpec& fsm);

// One full assignment of the signals a state's guards reference, and the edge
// that fires for it (nullopt: no edge fires, the hardened design goes to ERROR).
struct GuardConfiguration {
  std::size_t state;
  std::vector<std::pair<std::size_t, std::uint64_t>> values;  // (input index, value)
  std::optional<std::size_t> edge;                            // index into extract_cfg()
};

// Signals referenced by the non-default guards of each state, in declaration order.
std::vector<std::vector<std::size_t>> referenced_signals(const FsmSpec& fsm);

inline constexpr unsigned kMaxGuardBitsPerState = 16;

std::vector<GuardConfiguration> enumerate_configurations(const FsmSpec& fsm,
                                                         const std::vector<CfgEdge>& edges);

// Index into `edges` of the edge that fires, or nullopt when none does.
std::optional<std::size_t> fire(const FsmSpec& fsm, const std::vector<CfgEdge>& edges,
                                std::size_t state, const Assignment& inputs);

// Golden reference simulation. Returns trace.size() + 1 state names starting
// at the reset state.
std::vector<std::string> simulate_spec(const FsmSpec& fsm, std::span<const Assignment> trace);

// Outputs visible in `state` under `inputs` (Moore outputs overlaid by the
// firing edge's Mealy outputs). Unassigned outputs read 0.
Assignment spec_outputs(const FsmSpec& fsm, std::size_t state, const Assignment& inputs);

// Random trace with uniformly drawn values for every input.
std::vector<Assignment> random_trace(const FsmSpec& fsm, std::size_t length, std::uint64_t seed);

// Walk from the reset state that fires every reachable guard configuration at
// least once, when one walk can. A configuration that would strand others
// (leaving for a region with no way back) is taken last. Signals a state does
// not reference are driven with 0.
std::vector<Assignment> cover_trace(const FsmSpec& fsm);

}  // namespace hardfsm
