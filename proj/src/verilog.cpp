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

#include "hardfsm/verilog.hpp"

#include <algorithm>
#include <map>
#include <regex>
#include <sstream>

namespace hardfsm {

namespace {

std::string tag_comment(StageTag tag) {
  const auto t = to_string(tag);
  return t.empty() ? std::string() : " // " + std::string(t);
}

std::string expression(const Netlist& n, const Gate& g) {
  auto name = [&](std::size_t i) { return n.net_name(g.inputs[i]); };
  switch (g.kind) {
    case GateKind::kXor:
      return name(0) + " ^ " + name(1);
    case GateKind::kAnd:
      return name(0) + " & " + name(1);
    case GateKind::kOr:
      return name(0) + " | " + name(1);
    case GateKind::kNot:
      return "~" + name(0);
    case GateKind::kMux:
      return name(0) + " ? " + name(2) + " : " + name(1);
    case GateKind::kConst0:
      return "1'b0";
    case GateKind::kConst1:
      return "1'b1";
    case GateKind::kBuf:
      return name(0);
  }
  return {};
}

}  // namespace

std::string emit_verilog(const Netlist& netlist) {
  std::ostringstream out;
  out << "// Structural netlist emitted by hardfsm.\n";
  out << "module " << netlist.name() << " (\n";
  std::vector<std::string> port_lines{"  input wire clk", "  input wire rst_n"};
  for (const auto& p : netlist.inputs()) {
    port_lines.push_back("  input wire [" + std::to_string(p.bits.size() - 1) + ":0] " + p.name);
  }
  for (const auto& p : netlist.outputs()) {
    port_lines.push_back("  output wire [" + std::to_string(p.bits.size() - 1) + ":0] " + p.name);
  }
  for (std::size_t i = 0; i < port_lines.size(); ++i) {
    out << port_lines[i] << (i + 1 < port_lines.size() ? ",\n" : "\n");
  }
  out << ");\n";

  std::vector<std::string> wires;
  for (const auto& g : netlist.gates()) wires.push_back(netlist.net_name(g.output));
  std::vector<std::string> regs;
  for (const auto& f : netlist.flops()) regs.push_back(netlist.net_name(f.q));
  std::sort(wires.begin(), wires.end());
  std::sort(regs.begin(), regs.end());
  for (const auto& w : wires) out << "  wire " << w << ";\n";
  for (const auto& r : regs) out << "  reg " << r << ";\n";
  out << "\n";
  for (const auto& g : netlist.gates()) {
    out << "  assign " << netlist.net_name(g.output) << " = " << expression(netlist, g) << ";" << tag_comment(g.tag)
        << "\n";
  }
  for (const auto& f : netlist.flops()) {
    const auto& q = netlist.net_name(f.q);
    out << "  always @(posedge clk or negedge rst_n) if (!rst_n) " << q << " <= 1'b" << (f.reset_value ? 1 : 0)
        << "; else " << q << " <= " << netlist.net_name(f.d) << ";" << tag_comment(f.tag) << "\n";
  }
  for (const auto& p : netlist.outputs()) {
    for (std::size_t i = 0; i < p.bits.size(); ++i) {
      out << "  assign " << p.name << "[" << i << "] = " << netlist.net_name(p.bits[i]) << ";\n";
    }
  }
  out << "endmodule\n";
  return out.str();
}

Netlist parse_verilog(std::string_view text) {
  static const std::string kId = R"([A-Za-z_][A-Za-z0-9_]*)";
  static const std::string kRef = R"(([A-Za-z_][A-Za-z0-9_]*(?:\[\d+\])?))";
  static const std::regex module_re("^module (" + kId + ") \\($");
  static const std::regex port_re("^(input|output) wire (?:\\[(\\d+):0\\] )?(" + kId + "),?$");
  static const std::regex decl_re("^(wire|reg) (" + kId + ");$");
  static const std::regex assign_re("^assign " + kRef + " = (.*);(?: // (\\w+))?$");
  static const std::regex always_re(
      "^always @\\(posedge clk or negedge rst_n\\) if \\(!rst_n\\) (" + kId + ") <= 1'b([01]); else (" + kId +
      ") <= " + kRef + ";(?: // (\\w+))?$");
  static const std::regex binary_re("^" + kRef + " ([\\^&|]) " + kRef + "$");
  static const std::regex mux_re("^" + kRef + " \\? " + kRef + " : " + kRef + "$");
  static const std::regex not_re("^~" + kRef + "$");
  static const std::regex buf_re("^" + kRef + "$");

  std::string module_name;
  std::vector<std::pair<std::string, std::size_t>> inputs;
  std::vector<std::pair<std::string, std::size_t>> outputs;
  std::vector<std::string> nets;
  std::vector<std::pair<std::size_t, std::string>> statements;  // (line, text)

  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  bool ended = false;
  auto fail = [&](const std::string& msg) -> Error {
    return Error("verilog:" + std::to_string(line_no) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos) continue;
    line = line.substr(first);
    while (!line.empty() && (line.back() == ' ' || line.back() == '\r')) line.pop_back();
    if (line.starts_with("//") || line == ");") continue;
    std::smatch m;
    if (std::regex_match(line, m, module_re)) {
      module_name = m[1];
    } else if (std::regex_match(line, m, port_re)) {
      const std::string name = m[3];
      if (name == "clk" || name == "rst_n") continue;
      const std::size_t width = m[2].matched ? std::stoul(m[2]) + 1 : 1;
      (m[1] == "input" ? inputs : outputs).emplace_back(name, width);
    } else if (std::regex_match(line, m, decl_re)) {
      nets.push_back(m[2]);
    } else if (line.starts_with("assign ") || line.starts_with("always ")) {
      statements.emplace_back(line_no, line);
    } else if (line == "endmodule") {
      ended = true;
      break;
    } else {
      throw fail("unsupported construct '" + line + "'");
    }
  }
  if (module_name.empty()) throw Error("verilog: missing module header");
  if (!ended) throw Error("verilog: missing endmodule");

  Netlist n(module_name);
  for (const auto& [name, width] : inputs) n.add_input(name, width);
  for (const auto& name : nets) {
    if (n.add_net(name) != *n.find_net(name)) throw Error("verilog: duplicate declaration of '" + name + "'");
  }
  auto ref = [&](const std::string& name) {
    auto id = n.find_net(name);
    if (!id) throw fail("undeclared net '" + name + "'");
    return *id;
  };
  std::map<std::string, std::vector<std::optional<NetId>>> output_bits;
  for (const auto& [name, width] : outputs) output_bits[name].resize(width);
  static const std::regex port_bit_re("^(" + kId + ")\\[(\\d+)\\]$");

  for (const auto& [ln, stmt] : statements) {
    line_no = ln;
    std::smatch m;
    if (std::regex_match(stmt, m, always_re)) {
      if (m[1] != m[3]) throw fail("flop assigns two different registers");
      const StageTag tag = m[5].matched ? stage_tag_from_string(m[5].str()) : StageTag::kNone;
      n.add_flop(ref(m[4]), ref(m[1]), m[2] == "1", tag);
      continue;
    }
    if (!std::regex_match(stmt, m, assign_re)) throw fail("malformed statement '" + stmt + "'");
    const std::string lhs = m[1];
    const std::string rhs = m[2];
    const StageTag tag = m[3].matched ? stage_tag_from_string(m[3].str()) : StageTag::kNone;
    std::smatch pm;
    if (std::regex_match(lhs, pm, port_bit_re) && output_bits.count(pm[1].str())) {
      auto& bits = output_bits[pm[1].str()];
      const std::size_t idx = std::stoul(pm[2]);
      if (idx >= bits.size()) throw fail("output bit out of range");
      std::smatch em;
      if (!std::regex_match(rhs, em, buf_re)) throw fail("output ports must be driven by a net");
      bits[idx] = ref(em[1]);
      continue;
    }
    const NetId out = ref(lhs);
    std::smatch em;
    if (rhs == "1'b0") {
      n.add_gate_driving(GateKind::kConst0, {}, out, tag);
    } else if (rhs == "1'b1") {
      n.add_gate_driving(GateKind::kConst1, {}, out, tag);
    } else if (std::regex_match(rhs, em, mux_re)) {
      n.add_gate_driving(GateKind::kMux, {ref(em[1]), ref(em[3]), ref(em[2])}, out, tag);
    } else if (std::regex_match(rhs, em, binary_re)) {
      const std::string op = em[2];
      const GateKind kind = op == "^" ? GateKind::kXor : op == "&" ? GateKind::kAnd : GateKind::kOr;
      n.add_gate_driving(kind, {ref(em[1]), ref(em[3])}, out, tag);
    } else if (std::regex_match(rhs, em, not_re)) {
      n.add_gate_driving(GateKind::kNot, {ref(em[1])}, out, tag);
    } else if (std::regex_match(rhs, em, buf_re)) {
      n.add_gate_driving(GateKind::kBuf, {ref(em[1])}, out, tag);
    } else {
      throw fail("unsupported expression '" + rhs + "'");
    }
  }
  for (const auto& [name, width] : outputs) {
    std::vector<NetId> bits;
    for (const auto& b : output_bits[name]) {
      if (!b) throw Error("verilog: output port '" + name + "' has an undriven bit");
      bits.push_back(*b);
    }
    n.add_output(name, bits);
  }
  n.levelize();
  return n;
}

}  // namespace hardfsm
