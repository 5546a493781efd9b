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

#include <string>
#include <string_view>

#include "hardfsm/netlist.hpp"

namespace hardfsm {

// Structural Verilog-2001: one continuous assignment per gate, one
// asynchronous-reset always block per flop, plus clk and rst_n ports. Stage
// tags travel in trailing comments. Declarations are sorted by name; gates and
// flops keep netlist order, so the text is a pure function of the netlist.
std::string emit_verilog(const Netlist& netlist);

// Reads back exactly the subset emit_verilog produces.
Netlist parse_verilog(std::string_view text);

}  // namespace hardfsm
