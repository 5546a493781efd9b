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
#include <string_view>
#include <unordered_map>
#include <vector>

#include "hardfsm/bits.hpp"
#include "json.hpp"

namespace hardfsm {

using NetId = std::uint32_t;

enum class GateKind { kXor, kAnd, kOr, kNot, kMux, kConst0, kConst1, kBuf };

// Pipeline stage a gate or flop belongs to. Fault campaigns filter on these.
enum class StageTag {
  kNone,
  kMatch,       // current-state / control pattern match
  kModSelect,   // modifier selection
  kMix,         // distribution of the input triple onto diffusion blocks
  kDiffusion,   // XOR-only diffusion blocks
  kUnmix,       // next-state concatenation and error-bit taps
  kInfect,      // AND of next state with the error-bit conjunction
  kStateReg,    // state register
  kErrorLogic,  // validity and alert logic
  kOutput,      // output decoder
};

std::string_view to_string(GateKind kind);
GateKind gate_kind_from_string(std::string_view s);
std::string_view to_string(StageTag tag);
StageTag stage_tag_from_string(std::string_view s);

// MUX inputs are {select, value when 0, value when 1}.
struct Gate {
  GateKind kind;
  std::vector<NetId> inputs;
  NetId output;
  StageTag tag = StageTag::kNone;
};

struct Flop {
  NetId d;
  NetId q;
  bool reset_value = false;
  StageTag tag = StageTag::kNone;
};

struct Port {
  std::string name;
  std::vector<NetId> bits;  // bit 0 first
};

class Netlist {
 public:
  explicit Netlist(std::string name = "top") : name_(std::move(name)) {}

  const std::string& name() const { return name_; }

  // Net names are made unique by suffixing; the final name is returned via net_name().
  NetId add_net(std::string_view name);
  NetId add_gate(GateKind kind, std::vector<NetId> inputs, StageTag tag, std::string_view out_name);
  // Gate driving an existing, undriven net.
  void add_gate_driving(GateKind kind, std::vector<NetId> inputs, NetId output, StageTag tag);
  // Creates `width` nets named name[i] and registers them as an input port.
  std::vector<NetId> add_input(std::string_view name, std::size_t width);
  void add_output(std::string_view name, std::vector<NetId> bits);
  // q must be an undriven net created with add_net.
  void add_flop(NetId d, NetId q, bool reset_value, StageTag tag);

  std::size_t net_count() const { return net_names_.size(); }
  const std::string& net_name(NetId id) const { return net_names_.at(id); }
  std::optional<NetId> find_net(std::string_view name) const;

  const std::vector<Gate>& gates() const { return gates_; }
  const std::vector<Flop>& flops() const { return flops_; }
  const std::vector<Port>& inputs() const { return inputs_; }
  const std::vector<Port>& outputs() const { return outputs_; }
  const Port& input(std::string_view name) const;
  const Port& output(std::string_view name) const;
  std::size_t input_width() const;
  std::size_t output_width() const;

  // Single-driver, reference and acyclicity check. Returns gate indices in
  // evaluation order. Throws hardfsm::Error naming the offending net.
  std::vector<std::size_t> levelize() const;

  nlohmann::ordered_json to_json() const;
  static Netlist from_json(const nlohmann::ordered_json& j);

 private:
  std::string name_;
  std::vector<std::string> net_names_;
  std::unordered_map<std::string, NetId> by_name_;
  std::vector<Gate> gates_;
  std::vector<Flop> flops_;
  std::vector<Port> inputs_;
  std::vector<Port> outputs_;
};

enum class FaultEffect { kFlip, kStuck0, kStuck1 };

std::string_view to_string(FaultEffect e);
FaultEffect fault_effect_from_string(std::string_view s);

// A flip acts in one cycle (or every cycle when `cycle` is empty). Stuck-at
// faults hold from `cycle` onwards (from cycle 0 when empty).
struct FaultSite {
  NetId net;
  FaultEffect effect = FaultEffect::kFlip;
  std::optional<std::size_t> cycle;

  friend bool operator==(const FaultSite&, const FaultSite&) = default;
};

// One input frame per cycle: bits of every input port concatenated in port order.
using InputFrame = std::vector<std::uint8_t>;

struct SimResult {
  std::vector<std::vector<std::uint8_t>> states;   // cycles + 1 flop snapshots
  std::vector<std::vector<std::uint8_t>> outputs;  // cycles output-bit snapshots
};

// Two-valued cycle simulator. Cycle t evaluates the combinational logic from
// flop state t and input frame t; flop state t + 1 is taken from the d nets.
// Holds no mutable state, so one instance may serve several threads.
class Simulator {
 public:
  explicit Simulator(const Netlist& netlist);

  const Netlist& netlist() const { return *netlist_; }

  SimResult run(std::span<const InputFrame> trace, std::span<const FaultSite> faults = {}) const;

  // Scratch buffers for step(); one per thread.
  struct Workspace {
    std::vector<std::uint8_t> values;
    std::vector<std::uint8_t> override_op;  // 0 none, 1 flip, 2 stuck0, 3 stuck1
  };
  Workspace make_workspace() const;

  // Evaluates cycle `cycle`; writes output bits and the next flop state.
  void step(Workspace& ws, std::span<const std::uint8_t> state, const InputFrame& inputs,
            std::span<const FaultSite> faults, std::size_t cycle, std::vector<std::uint8_t>& outputs,
            std::vector<std::uint8_t>& next_state) const;

  std::vector<std::uint8_t> reset_state() const;

 private:
  struct Op {
    GateKind kind;
    NetId a, b, c;
    NetId out;
  };
  const Netlist* netlist_;
  std::vector<Op> ops_;
  std::vector<NetId> input_nets_;
  std::vector<NetId> output_nets_;
};

enum class FaultScope { kAll, kDiffusionOnly, kInputsOnly };

std::string_view to_string(FaultScope s);
FaultScope fault_scope_from_string(std::string_view s);

// Candidate fault locations. kAll: every gate output then every flop q.
// kDiffusionOnly: gates tagged kDiffusion. kInputsOnly: state-register q nets
// then the bits of every input port whose name ends in "_e".
std::vector<NetId> enumerate_fault_sites(const Netlist& netlist, FaultScope scope);

}  // namespace hardfsm
