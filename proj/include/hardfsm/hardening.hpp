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

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hardfsm/coding.hpp"
#include "hardfsm/fsm.hpp"
#include "hardfsm/gf_ring.hpp"
#include "hardfsm/netlist.hpp"
#include "json.hpp"

namespace hardfsm {

struct HardeningConfig {
  unsigned protection_level = 2;
  // Error bits per diffusion block; defaults to the protection level.
  std::optional<unsigned> error_bits;
  // Number of 32-bit diffusion blocks; 0 picks the smallest feasible count.
  unsigned block_count = 0;
  std::uint64_t seed = 1;
  // Replicate the pattern-match and modifier-select logic per protection level
  // and flag any disagreement between the copies.
  bool encoded_mux_selectors = false;
  std::string mds = "M8_3_4_6";

  unsigned effective_error_bits() const { return error_bits.value_or(protection_level); }
};

// Codebook for the state register plus one per control input (FsmSpec order).
struct CodeBooks {
  CodeBook state;
  std::vector<std::string> input_names;
  std::vector<CodeBook> inputs;

  std::size_t control_width() const;
  const CodeBook& input(std::string_view name) const;

  nlohmann::ordered_json to_json() const;
  static CodeBooks from_json(const nlohmann::ordered_json& j);
};

inline constexpr unsigned kMaxEncodedSignalWidth = 10;

// State symbols get the FSM state names plus "ERROR"; control symbols are the
// decimal values of each signal plus "INVALID".
CodeBooks generate_codebooks(const FsmSpec& fsm, unsigned protection_level, std::uint64_t seed);

// Position of one bit inside the k 32-bit diffusion vectors.
struct BitSlot {
  unsigned block;
  unsigned position;

  friend bool operator==(const BitSlot&, const BitSlot&) = default;
};

struct BlockLayout {
  unsigned block_count = 0;
  unsigned error_bits = 0;                           // topmost bits of every output vector
  std::vector<BitSlot> state_in;                     // per encoded current-state bit
  std::vector<BitSlot> control_in;                   // per encoded control bit
  std::vector<BitSlot> state_out;                    // per encoded next-state bit
  std::vector<std::vector<unsigned>> modifier_lanes;  // per block, byte lanes driven by the modifier

  std::size_t modifier_width() const;
  // Modifier bit order: block, then lane, then bit within lane.
  std::vector<BitSlot> modifier_slots() const;
  std::vector<BitSlot> error_slots() const;
};

// Steers next-state bits away from output bits that a single fault inside the
// diffusion circuit flips together (at least `protection_level` of them)
// without touching an error bit.
struct PlacementHint {
  const XorCircuit* circuit = nullptr;
  unsigned protection_level = 2;
};

// Distributes current-state and control bits round-robin over the blocks
// (low byte lanes), next-state bits round-robin over the blocks and reserves
// the top `error_bits` of every output vector. Without a hint next-state bits
// take the lowest output positions; with one they go to the positions, within
// the fewest output lanes, that minimize single-fault codeword collisions.
// Each block gets one whole modifier lane per constrained output lane. Throws
// when the widths do not fit (or do not fit in `block_count` blocks, when
// nonzero).
BlockLayout plan_layout(std::size_t state_width, std::size_t control_width, unsigned error_bits,
                        unsigned block_count = 0, const PlacementHint* hint = nullptr);

// Output difference caused by flipping each circuit node, then each input bit.
std::vector<std::uint32_t> single_fault_patterns(const XorCircuit& circuit);

struct PlanInput {
  BitVector state;    // encoded current state
  BitVector control;  // encoded, masked control word
  BitVector next;     // encoded next state
  std::string label;  // used in diagnostics
};

struct TransitionPlan {
  std::size_t configuration = 0;  // index into enumerate_configurations()
  std::size_t edge = 0;           // index into extract_cfg()
  BitVector state_code;
  BitVector control_code;
  BitVector next_code;
  BitVector modifier;
};

// Packs one input triple into the per-block 32-bit vectors.
std::vector<std::uint32_t> pack_blocks(const BlockLayout& layout, const BitVector& state, const BitVector& control,
                                       const BitVector& modifier);

// Solves every block's modifier so the designated outputs carry `next` and all
// error bits are 1. Throws naming the plan and the rank when a system has no
// solution. `configuration`/`edge` of the returned plans are left at 0.
std::vector<TransitionPlan> solve_modifiers(const BlockLayout& layout, const std::vector<PlanInput>& inputs,
                                            const MdsSpec& mds);

// Recomputes the diffusion output for a plan and checks next state and error bits.
bool verify_plan(const BlockLayout& layout, const TransitionPlan& plan, const MdsSpec& mds);

struct HardenedDesign {
  FsmSpec fsm;
  HardeningConfig config;
  std::vector<CfgEdge> edges;
  std::vector<GuardConfiguration> configurations;
  CodeBooks codes;
  BlockLayout layout;
  std::vector<TransitionPlan> plans;
  Netlist netlist;

  nlohmann::ordered_json report() const;
};

// Encoded control word for a configuration: codewords of the signals the state
// references, zeros elsewhere.
BitVector masked_control(const FsmSpec& fsm, const CodeBooks& codes, const GuardConfiguration& config);

Netlist build_hardened_netlist(const FsmSpec& fsm, const std::vector<CfgEdge>& edges,
                               const std::vector<GuardConfiguration>& configurations,
                               const std::vector<TransitionPlan>& plans, const HardeningConfig& config,
                               const CodeBooks& codes, const BlockLayout& layout, const MdsSpec& mds);

// Whole pipeline: codes, layout, modifiers, netlist. Rejects protection level < 2.
HardenedDesign harden(const FsmSpec& fsm, const HardeningConfig& config);

// Input frame for a netlist whose input ports are the encoded control ports.
InputFrame encode_inputs(const CodeBooks& codes, const Assignment& values);
std::vector<InputFrame> encode_trace(const CodeBooks& codes, std::span<const Assignment> trace);

// Gate count per stage tag, plus "total" and "flops".
nlohmann::ordered_json gate_counts(const Netlist& netlist);

}  // namespace hardfsm
