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

#include "hardfsm/netlist.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <set>

namespace hardfsm {

namespace {

constexpr std::array<std::pair<GateKind, std::string_view>, 8> kGateNames{{
    {GateKind::kXor, "XOR"},
    {GateKind::kAnd, "AND"},
    {GateKind::kOr, "OR"},
    {GateKind::kNot, "NOT"},
    {GateKind::kMux, "MUX"},
    {GateKind::kConst0, "CONST0"},
    {GateKind::kConst1, "CONST1"},
    {GateKind::kBuf, "BUF"},
}};

constexpr std::array<std::pair<StageTag, std::string_view>, 10> kTagNames{{
    {StageTag::kNone, ""},
    {StageTag::kMatch, "match"},
    {StageTag::kModSelect, "modsel"},
    {StageTag::kMix, "mix"},
    {StageTag::kDiffusion, "diffusion"},
    {StageTag::kUnmix, "unmix"},
    {StageTag::kInfect, "infect"},
    {StageTag::kStateReg, "state_reg"},
    {StageTag::kErrorLogic, "error_logic"},
    {StageTag::kOutput, "output"},
}};

std::size_t arity(GateKind kind) {
  switch (kind) {
    case GateKind::kXor:
    case GateKind::kAnd:
    case GateKind::kOr:
      return 2;
    case GateKind::kNot:
    case GateKind::kBuf:
      return 1;
    case GateKind::kMux:
      return 3;
    case GateKind::kConst0:
    case GateKind::kConst1:
      return 0;
  }
  return 0;
}

const std::set<std::string, std::less<>> kKeywords = {
    "module", "endmodule", "input", "output", "wire", "reg", "assign", "always", "begin", "end",
    "if", "else", "posedge", "negedge", "or", "and", "xor", "not", "buf", "clk", "rst_n"};

std::string sanitize(std::string_view name) {
  std::string s;
  for (char c : name) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    s += ok ? c : '_';
  }
  if (s.empty() || (s[0] >= '0' && s[0] <= '9')) s = "n_" + s;
  if (kKeywords.count(s)) s += "_n";
  return s;
}

}  // namespace

std::string_view to_string(GateKind kind) {
  for (const auto& [k, n] : kGateNames) {
    if (k == kind) return n;
  }
  return "?";
}

GateKind gate_kind_from_string(std::string_view s) {
  for (const auto& [k, n] : kGateNames) {
    if (n == s) return k;
  }
  throw Error("unknown gate kind '" + std::string(s) + "'");
}

std::string_view to_string(StageTag tag) {
  for (const auto& [t, n] : kTagNames) {
    if (t == tag) return n;
  }
  return "";
}

StageTag stage_tag_from_string(std::string_view s) {
  for (const auto& [t, n] : kTagNames) {
    if (n == s) return t;
  }
  throw Error("unknown stage tag '" + std::string(s) + "'");
}

std::string_view to_string(FaultEffect e) {
  switch (e) {
    case FaultEffect::kFlip:
      return "flip";
    case FaultEffect::kStuck0:
      return "stuck0";
    case FaultEffect::kStuck1:
      return "stuck1";
  }
  return "?";
}

FaultEffect fault_effect_from_string(std::string_view s) {
  if (s == "flip") return FaultEffect::kFlip;
  if (s == "stuck0") return FaultEffect::kStuck0;
  if (s == "stuck1") return FaultEffect::kStuck1;
  throw Error("unknown fault effect '" + std::string(s) + "'");
}

std::string_view to_string(FaultScope s) {
  switch (s) {
    case FaultScope::kAll:
      return "all";
    case FaultScope::kDiffusionOnly:
      return "diffusion";
    case FaultScope::kInputsOnly:
      return "inputs";
  }
  return "?";
}

FaultScope fault_scope_from_string(std::string_view s) {
  if (s == "all") return FaultScope::kAll;
  if (s == "diffusion" || s == "diffusion_only") return FaultScope::kDiffusionOnly;
  if (s == "inputs" || s == "inputs_only") return FaultScope::kInputsOnly;
  throw Error("unknown fault scope '" + std::string(s) + "'");
}

// --- Netlist ---------------------------------------------------------------

NetId Netlist::add_net(std::string_view name) {
  const std::string base = sanitize(name);
  std::string unique = base;
  for (std::size_t n = 1; by_name_.count(unique); ++n) unique = base + "_" + std::to_string(n);
  const NetId id = static_cast<NetId>(net_names_.size());
  net_names_.push_back(unique);
  by_name_.emplace(unique, id);
  return id;
}

NetId Netlist::add_gate(GateKind kind, std::vector<NetId> inputs, StageTag tag, std::string_view out_name) {
  const NetId out = add_net(out_name);
  add_gate_driving(kind, std::move(inputs), out, tag);
  return out;
}

void Netlist::add_gate_driving(GateKind kind, std::vector<NetId> inputs, NetId output, StageTag tag) {
  if (inputs.size() != arity(kind)) {
    throw Error(std::string(to_string(kind)) + " gate expects " + std::to_string(arity(kind)) + " inputs");
  }
  for (auto in : inputs) {
    if (in >= net_names_.size()) throw Error("gate input references an unknown net");
  }
  gates_.push_back({kind, std::move(inputs), output, tag});
}

std::vector<NetId> Netlist::add_input(std::string_view name, std::size_t width) {
  const std::string port = sanitize(name);
  for (const auto& p : inputs_) {
    if (p.name == port) throw Error("duplicate input port '" + port + "'");
  }
  Port p{port, {}};
  for (std::size_t i = 0; i < width; ++i) {
    const std::string bit = port + "[" + std::to_string(i) + "]";
    if (by_name_.count(bit)) throw Error("net '" + bit + "' already exists");
    const NetId id = static_cast<NetId>(net_names_.size());
    net_names_.push_back(bit);
    by_name_.emplace(bit, id);
    p.bits.push_back(id);
  }
  inputs_.push_back(p);
  return p.bits;
}

void Netlist::add_output(std::string_view name, std::vector<NetId> bits) {
  const std::string port = sanitize(name);
  for (const auto& p : outputs_) {
    if (p.name == port) throw Error("duplicate output port '" + port + "'");
  }
  if (by_name_.count(port)) throw Error("output port '" + port + "' collides with a net name");
  for (auto b : bits) {
    if (b >= net_names_.size()) throw Error("output port references an unknown net");
  }
  outputs_.push_back({port, std::move(bits)});
}

void Netlist::add_flop(NetId d, NetId q, bool reset_value, StageTag tag) {
  if (d >= net_names_.size() || q >= net_names_.size()) throw Error("flop references an unknown net");
  flops_.push_back({d, q, reset_value, tag});
}

std::optional<NetId> Netlist::find_net(std::string_view name) const {
  auto it = by_name_.find(std::string(name));
  if (it == by_name_.end()) return std::nullopt;
  return it->second;
}

const Port& Netlist::input(std::string_view name) const {
  for (const auto& p : inputs_) {
    if (p.name == name) return p;
  }
  throw Error("no input port '" + std::string(name) + "'");
}

const Port& Netlist::output(std::string_view name) const {
  for (const auto& p : outputs_) {
    if (p.name == name) return p;
  }
  throw Error("no output port '" + std::string(name) + "'");
}

std::size_t Netlist::input_width() const {
  std::size_t n = 0;
  for (const auto& p : inputs_) n += p.bits.size();
  return n;
}

std::size_t Netlist::output_width() const {
  std::size_t n = 0;
  for (const auto& p : outputs_) n += p.bits.size();
  return n;
}

std::vector<std::size_t> Netlist::levelize() const {
  constexpr std::size_t kNoGate = static_cast<std::size_t>(-1);
  std::vector<int> drivers(net_names_.size(), 0);
  std::vector<std::size_t> driving_gate(net_names_.size(), kNoGate);
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    ++drivers[gates_[g].output];
    driving_gate[gates_[g].output] = g;
  }
  for (const auto& f : flops_) ++drivers[f.q];
  for (const auto& p : inputs_) {
    for (auto b : p.bits) ++drivers[b];
  }
  for (std::size_t n = 0; n < net_names_.size(); ++n) {
    if (drivers[n] != 1) {
      throw Error("net '" + net_names_[n] + "' has " + std::to_string(drivers[n]) + " drivers");
    }
  }
  std::vector<std::size_t> pending(gates_.size(), 0);
  std::vector<std::vector<std::size_t>> fanout(gates_.size());
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    for (auto in : gates_[g].inputs) {
      if (driving_gate[in] != kNoGate) {
        ++pending[g];
        fanout[driving_gate[in]].push_back(g);
      }
    }
  }
  std::deque<std::size_t> ready;
  for (std::size_t g = 0; g < gates_.size(); ++g) {
    if (pending[g] == 0) ready.push_back(g);
  }
  std::vector<std::size_t> order;
  order.reserve(gates_.size());
  while (!ready.empty()) {
    const std::size_t g = ready.front();
    ready.pop_front();
    order.push_back(g);
    for (auto succ : fanout[g]) {
      if (--pending[succ] == 0) ready.push_back(succ);
    }
  }
  if (order.size() != gates_.size()) {
    for (std::size_t g = 0; g < gates_.size(); ++g) {
      if (pending[g] != 0) {
        throw Error("combinational cycle through net '" + net_names_[gates_[g].output] + "'");
      }
    }
  }
  return order;
}

nlohmann::ordered_json Netlist::to_json() const {
  using ordered_json = nlohmann::ordered_json;
  ordered_json gates = ordered_json::array();
  for (const auto& g : gates_) {
    ordered_json in = ordered_json::array();
    for (auto n : g.inputs) in.push_back(net_names_[n]);
    gates.push_back({{"kind", to_string(g.kind)}, {"in", in}, {"out", net_names_[g.output]}, {"tag", to_string(g.tag)}});
  }
  ordered_json flops = ordered_json::array();
  for (const auto& f : flops_) {
    flops.push_back({{"d", net_names_[f.d]}, {"q", net_names_[f.q]}, {"reset", f.reset_value ? 1 : 0}, {"tag", to_string(f.tag)}});
  }
  auto ports = [&](const std::vector<Port>& list) {
    ordered_json obj = ordered_json::object();
    for (const auto& p : list) {
      ordered_json bits = ordered_json::array();
      for (auto b : p.bits) bits.push_back(net_names_[b]);
      obj[p.name] = bits;
    }
    return obj;
  };
  return {{"name", name_},
          {"nets", net_names_},
          {"gates", gates},
          {"flops", flops},
          {"ports", {{"inputs", ports(inputs_)}, {"outputs", ports(outputs_)}}}};
}

Netlist Netlist::from_json(const nlohmann::ordered_json& j) {
  try {
    Netlist n(j.value("name", std::string("top")));
    for (const auto& name : j.at("nets")) {
      const auto s = name.get<std::string>();
      if (n.by_name_.count(s)) throw Error("duplicate net '" + s + "' in netlist JSON");
      n.by_name_.emplace(s, static_cast<NetId>(n.net_names_.size()));
      n.net_names_.push_back(s);
    }
    auto net = [&](const nlohmann::ordered_json& v) {
      const auto s = v.get<std::string>();
      auto id = n.find_net(s);
      if (!id) throw Error("netlist JSON references unknown net '" + s + "'");
      return *id;
    };
    for (const auto& g : j.at("gates")) {
      std::vector<NetId> in;
      for (const auto& v : g.at("in")) in.push_back(net(v));
      n.add_gate_driving(gate_kind_from_string(g.at("kind").get<std::string>()), std::move(in), net(g.at("out")),
                         stage_tag_from_string(g.value("tag", std::string())));
    }
    for (const auto& f : j.at("flops")) {
      n.add_flop(net(f.at("d")), net(f.at("q")), f.value("reset", 0) != 0,
                 stage_tag_from_string(f.value("tag", std::string())));
    }
    const auto& ports = j.at("ports");
    for (const auto& [name, bits] : ports.at("inputs").items()) {
      Port p{name, {}};
      for (const auto& b : bits) p.bits.push_back(net(b));
      n.inputs_.push_back(std::move(p));
    }
    for (const auto& [name, bits] : ports.at("outputs").items()) {
      Port p{name, {}};
      for (const auto& b : bits) p.bits.push_back(net(b));
      n.outputs_.push_back(std::move(p));
    }
    n.levelize();
    return n;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed netlist JSON: ") + e.what());
  }
}

// --- Simulator -------------------------------------------------------------

Simulator::Simulator(const Netlist& netlist) : netlist_(&netlist) {
  for (auto g : netlist.levelize()) {
    const Gate& gate = netlist.gates()[g];
    Op op{gate.kind, 0, 0, 0, gate.output};
    if (!gate.inputs.empty()) op.a = gate.inputs[0];
    if (gate.inputs.size() > 1) op.b = gate.inputs[1];
    if (gate.inputs.size() > 2) op.c = gate.inputs[2];
    ops_.push_back(op);
  }
  for (const auto& p : netlist.inputs()) input_nets_.insert(input_nets_.end(), p.bits.begin(), p.bits.end());
  for (const auto& p : netlist.outputs()) output_nets_.insert(output_nets_.end(), p.bits.begin(), p.bits.end());
}

Simulator::Workspace Simulator::make_workspace() const {
  return {std::vector<std::uint8_t>(netlist_->net_count(), 0), std::vector<std::uint8_t>(netlist_->net_count(), 0)};
}

std::vector<std::uint8_t> Simulator::reset_state() const {
  std::vector<std::uint8_t> s;
  for (const auto& f : netlist_->flops()) s.push_back(f.reset_value ? 1 : 0);
  return s;
}

namespace {

bool active(const FaultSite& f, std::size_t cycle) {
  if (f.effect == FaultEffect::kFlip) return !f.cycle || *f.cycle == cycle;
  return !f.cycle || cycle >= *f.cycle;
}

std::uint8_t apply_override(std::uint8_t op, std::uint8_t v) {
  switch (op) {
    case 1:
      return v ^ 1u;
    case 2:
      return 0;
    case 3:
      return 1;
    default:
      return v;
  }
}

std::uint8_t op_code(FaultEffect e) {
  switch (e) {
    case FaultEffect::kFlip:
      return 1;
    case FaultEffect::kStuck0:
      return 2;
    case FaultEffect::kStuck1:
      return 3;
  }
  return 0;
}

}  // namespace

void Simulator::step(Workspace& ws, std::span<const std::uint8_t> state, const InputFrame& inputs,
                     std::span<const FaultSite> faults, std::size_t cycle, std::vector<std::uint8_t>& outputs,
                     std::vector<std::uint8_t>& next_state) const {
  const auto& flops = netlist_->flops();
  if (inputs.size() != input_nets_.size()) {
    throw Error("input frame has " + std::to_string(inputs.size()) + " bits, netlist expects " +
                std::to_string(input_nets_.size()));
  }
  auto& v = ws.values;
  for (std::size_t i = 0; i < flops.size(); ++i) v[flops[i].q] = state[i];
  for (std::size_t i = 0; i < input_nets_.size(); ++i) v[input_nets_[i]] = inputs[i] & 1u;
  // Distinct nets carrying an active fault this cycle; two flips on one net cancel.
  std::array<NetId, 16> touched_small{};
  std::vector<NetId> touched_large;
  std::size_t touched_count = 0;
  for (const auto& f : faults) {
    if (f.net >= v.size()) throw Error("fault site references an unknown net");
    if (!active(f, cycle)) continue;
    std::uint8_t& op = ws.override_op[f.net];
    const std::uint8_t code = op_code(f.effect);
    if (op == 0) {
      if (touched_count < touched_small.size()) {
        touched_small[touched_count] = f.net;
      } else {
        touched_large.push_back(f.net);
      }
      ++touched_count;
    }
    op = (code == 1 && op == 1) ? 4 : (code == 1 && op == 4) ? 1 : code;
  }
  const bool any = touched_count > 0;
  auto for_touched = [&](auto&& fn) {
    for (std::size_t i = 0; i < std::min(touched_count, touched_small.size()); ++i) fn(touched_small[i]);
    for (auto n : touched_large) fn(n);
  };
  for_touched([&](NetId n) { v[n] = apply_override(ws.override_op[n], v[n]); });
  for (const auto& op : ops_) {
    std::uint8_t r;
    switch (op.kind) {
      case GateKind::kXor:
        r = v[op.a] ^ v[op.b];
        break;
      case GateKind::kAnd:
        r = v[op.a] & v[op.b];
        break;
      case GateKind::kOr:
        r = v[op.a] | v[op.b];
        break;
      case GateKind::kNot:
        r = v[op.a] ^ 1u;
        break;
      case GateKind::kMux:
        r = v[op.a] ? v[op.c] : v[op.b];
        break;
      case GateKind::kConst0:
        r = 0;
        break;
      case GateKind::kConst1:
        r = 1;
        break;
      case GateKind::kBuf:
      default:
        r = v[op.a];
        break;
    }
    if (any) r = apply_override(ws.override_op[op.out], r);
    v[op.out] = r;
  }
  outputs.resize(output_nets_.size());
  for (std::size_t i = 0; i < output_nets_.size(); ++i) outputs[i] = v[output_nets_[i]];
  next_state.resize(flops.size());
  for (std::size_t i = 0; i < flops.size(); ++i) next_state[i] = v[flops[i].d];
  for_touched([&](NetId n) { ws.override_op[n] = 0; });
}

SimResult Simulator::run(std::span<const InputFrame> trace, std::span<const FaultSite> faults) const {
  SimResult r;
  auto ws = make_workspace();
  r.states.push_back(reset_state());
  std::vector<std::uint8_t> outputs;
  std::vector<std::uint8_t> next;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    step(ws, r.states.back(), trace[t], faults, t, outputs, next);
    r.outputs.push_back(outputs);
    r.states.push_back(next);
  }
  return r;
}

std::vector<NetId> enumerate_fault_sites(const Netlist& netlist, FaultScope scope) {
  std::vector<NetId> sites;
  switch (scope) {
    case FaultScope::kAll:
      for (const auto& g : netlist.gates()) sites.push_back(g.output);
      for (const auto& f : netlist.flops()) sites.push_back(f.q);
      break;
    case FaultScope::kDiffusionOnly:
      for (const auto& g : netlist.gates()) {
        if (g.tag == StageTag::kDiffusion) sites.push_back(g.output);
      }
      break;
    case FaultScope::kInputsOnly:
      for (const auto& f : netlist.flops()) {
        if (f.tag == StageTag::kStateReg) sites.push_back(f.q);
      }
      for (const auto& p : netlist.inputs()) {
        if (p.name.ends_with("_e")) sites.insert(sites.end(), p.bits.begin(), p.bits.end());
      }
      break;
  }
  return sites;
}

}  // namespace hardfsm
