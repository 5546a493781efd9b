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

#include "hardfsm/fsm.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "hardfsm/bits.hpp"

namespace hardfsm {

namespace {

using ordered_json = nlohmann::ordered_json;

bool is_identifier(std::string_view s) {
  if (s.empty()) return false;
  auto head = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
  if (!head(s[0])) return false;
  return std::all_of(s.begin() + 1, s.end(), [&](char c) { return head(c) || (c >= '0' && c <= '9'); });
}

const std::set<std::string, std::less<>> kReservedNames = {
    "clk", "rst_n", "fsm_alert", "state_e", "module", "input", "output", "wire", "reg",
    "assign", "always", "begin", "end", "endmodule", "if", "else", "posedge", "negedge"};

std::uint64_t width_mask(unsigned width) {
  return width >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << width) - 1;
}

bool guards_overlap(const ControlPredicate& a, const ControlPredicate& b) {
  for (const auto& la : a.literals) {
    for (const auto& lb : b.literals) {
      if (la.signal == lb.signal && la.value != lb.value) return false;
    }
  }
  return true;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> tokens;
  std::string t;
  while (in >> t) tokens.push_back(t);
  return tokens;
}

[[noreturn]] void kiss_error(std::size_t line, std::size_t column, const std::string& msg) {
  throw Error("kiss2:" + std::to_string(line) + ":" + std::to_string(column) + ": " + msg);
}

FsmSpec parse_kiss2(std::string_view source) {
  FsmSpec fsm;
  fsm.name = "kiss2_fsm";
  std::optional<unsigned> num_inputs;
  std::optional<unsigned> num_outputs;
  std::optional<std::size_t> declared_states;
  std::optional<std::pair<std::string, std::size_t>> reset;  // state, line
  std::set<std::string> seen;
  std::size_t line_no = 0;

  auto add_state = [&](const std::string& s, std::size_t line, std::size_t col) {
    if (seen.insert(s).second) {
      fsm.states.push_back(s);
      if (declared_states && fsm.states.size() > *declared_states) {
        kiss_error(line, col, "unknown state '" + s + "' (.s declares " + std::to_string(*declared_states) + " states)");
      }
    }
  };

  std::istringstream in{std::string(source)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    const auto tokens = split_ws(raw);
    if (tokens.empty()) continue;
    const std::size_t col = raw.find_first_not_of(" \t") + 1;
    const std::string& head = tokens[0];
    if (head[0] == '.') {
      auto number = [&]() -> unsigned {
        if (tokens.size() != 2) kiss_error(line_no, col, "directive " + head + " expects one argument");
        try {
          return static_cast<unsigned>(std::stoul(tokens[1]));
        } catch (const std::exception&) {
          kiss_error(line_no, col, "directive " + head + " expects a number");
        }
      };
      if (head == ".i") {
        num_inputs = number();
      } else if (head == ".o") {
        num_outputs = number();
      } else if (head == ".s") {
        declared_states = number();
      } else if (head == ".p") {
        number();
      } else if (head == ".r") {
        if (tokens.size() != 2) kiss_error(line_no, col, ".r expects a state name");
        reset = {tokens[1], line_no};
      } else if (head == ".e" || head == ".end") {
        break;
      } else if (head == ".model") {
        if (tokens.size() == 2) fsm.name = tokens[1];
      } else {
        kiss_error(line_no, col, "unknown directive " + head);
      }
      continue;
    }
    if (!num_inputs || !num_outputs) kiss_error(line_no, col, "transition before .i/.o headers");
    if (fsm.inputs.empty() && fsm.outputs.empty()) {
      for (unsigned i = 0; i < *num_inputs; ++i) fsm.inputs.push_back({"i" + std::to_string(i), 1});
      for (unsigned i = 0; i < *num_outputs; ++i) fsm.outputs.push_back({"o" + std::to_string(i), 1});
    }
    const std::size_t expected = *num_outputs == 0 ? 3 : 4;
    std::vector<std::string> t = tokens;
    if (*num_inputs == 0 && t.size() == expected - 1) t.insert(t.begin(), "");
    if (t.size() != expected) {
      kiss_error(line_no, col, "expected " + std::to_string(expected) + " fields, got " + std::to_string(tokens.size()));
    }
    Transition tr;
    if (t[0].size() != *num_inputs) kiss_error(line_no, col, "input pattern has wrong length");
    for (unsigned i = 0; i < *num_inputs; ++i) {
      const char c = t[0][i];
      if (c == '-') continue;
      if (c != '0' && c != '1') kiss_error(line_no, col + i, std::string("bad input character '") + c + "'");
      tr.guard.literals.push_back({fsm.inputs[i].name, static_cast<std::uint64_t>(c - '0')});
    }
    const std::size_t state_col = raw.find(t[1]) + 1;
    add_state(t[1], line_no, state_col);
    add_state(t[2], line_no, raw.find(t[2], state_col) + 1);
    tr.from = t[1];
    tr.to = t[2];
    if (expected == 4) {
      if (t[3].size() != *num_outputs) kiss_error(line_no, col, "output pattern has wrong length");
      for (unsigned i = 0; i < *num_outputs; ++i) {
        const char c = t[3][i];
        if (c == '-' || c == '0') continue;
        if (c != '1') kiss_error(line_no, col, std::string("bad output character '") + c + "'");
        tr.outputs[fsm.outputs[i].name] = 1;
      }
    }
    fsm.transitions.push_back(std::move(tr));
  }
  if (fsm.states.empty()) throw Error("kiss2: no transitions");
  if (reset) {
    if (!seen.count(reset->first)) {
      kiss_error(reset->second, 1, "unknown state '" + reset->first + "' in .r");
    }
    fsm.reset_state = reset->first;
  } else {
    fsm.reset_state = fsm.states.front();
  }
  return fsm;
}

std::string json_location(std::string_view source, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < source.size(); ++i) {
    if (source[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

Assignment parse_values(const nlohmann::json& obj, const char* what) {
  Assignment values;
  if (obj.is_null()) return values;
  if (!obj.is_object()) throw Error(std::string(what) + " must be an object");
  for (const auto& [k, v] : obj.items()) {
    if (!v.is_number_unsigned()) {
      throw Error(std::string(what) + " value for '" + k + "' must be a non-negative integer");
    }
    values[k] = v.get<std::uint64_t>();
  }
  return values;
}

std::vector<SignalDecl> parse_signals(const nlohmann::json& arr, const char* what) {
  std::vector<SignalDecl> out;
  if (arr.is_null()) return out;
  if (!arr.is_array()) throw Error(std::string(what) + " must be an array");
  for (const auto& s : arr) {
    SignalDecl d;
    if (s.is_string()) {
      d.name = s.get<std::string>();
    } else {
      d.name = s.at("name").get<std::string>();
      d.width = s.value("width", 1u);
    }
    out.push_back(d);
  }
  return out;
}

FsmSpec parse_json(std::string_view source) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(source);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error("json:" + json_location(source, e.byte == 0 ? 0 : e.byte - 1) + ": syntax error");
  }
  FsmSpec fsm;
  try {
    fsm.name = doc.value("name", std::string("fsm"));
    for (const auto& s : doc.at("states")) fsm.states.push_back(s.get<std::string>());
    fsm.reset_state = doc.contains("reset") ? doc.at("reset").get<std::string>()
                                            : (fsm.states.empty() ? std::string() : fsm.states.front());
    fsm.inputs = parse_signals(doc.value("inputs", nlohmann::json::array()), "inputs");
    fsm.outputs = parse_signals(doc.value("outputs", nlohmann::json::array()), "outputs");
    fsm.complete_with_self_loops = doc.value("complete", true);
    for (const auto& t : doc.value("transitions", nlohmann::json::array())) {
      Transition tr;
      tr.from = t.at("from").get<std::string>();
      tr.to = t.at("to").get<std::string>();
      for (const auto& [sig, val] : parse_values(t.value("guard", nlohmann::json::object()), "guard")) {
        tr.guard.literals.push_back({sig, val});
      }
      tr.outputs = parse_values(t.value("outputs", nlohmann::json::object()), "outputs");
      fsm.transitions.push_back(std::move(tr));
    }
    if (doc.contains("state_outputs")) {
      for (const auto& [state, vals] : doc.at("state_outputs").items()) {
        fsm.state_outputs[state] = parse_values(vals, "state_outputs");
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("json: malformed FSM description: ") + e.what());
  }
  // Literal order follows input declaration order so that identical sources
  // produce identical guards regardless of JSON key order.
  for (auto& tr : fsm.transitions) {
    std::stable_sort(tr.guard.literals.begin(), tr.guard.literals.end(), [&](const Literal& a, const Literal& b) {
      auto idx = [&](const std::string& n) {
        for (std::size_t i = 0; i < fsm.inputs.size(); ++i) {
          if (fsm.inputs[i].name == n) return i;
        }
        return fsm.inputs.size();
      };
      return idx(a.signal) < idx(b.signal);
    });
  }
  return fsm;
}

bool state_is_complete(const FsmSpec& fsm, std::size_t state, const std::vector<std::size_t>& refs) {
  std::vector<const Transition*> outgoing;
  for (const auto& t : fsm.transitions) {
    if (fsm.state_index(t.from) != state) continue;
    if (t.guard.is_default()) return true;
    outgoing.push_back(&t);
  }
  unsigned bits = 0;
  for (auto r : refs) bits += fsm.inputs[r].width;
  if (bits > kMaxGuardBitsPerState) return false;
  for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
    Assignment a;
    unsigned shift = 0;
    for (auto r : refs) {
      a[fsm.inputs[r].name] = (code >> shift) & width_mask(fsm.inputs[r].width);
      shift += fsm.inputs[r].width;
    }
    const bool hit = std::any_of(outgoing.begin(), outgoing.end(), [&](const Transition* t) { return matches(t->guard, a); });
    if (!hit) return false;
  }
  return true;
}

}  // namespace

std::string ControlPredicate::to_string() const {
  if (literals.empty()) return "default";
  std::string s;
  for (const auto& l : literals) {
    if (!s.empty()) s += " & ";
    s += l.signal + "=" + std::to_string(l.value);
  }
  return s;
}

bool matches(const ControlPredicate& guard, const Assignment& inputs) {
  for (const auto& l : guard.literals) {
    auto it = inputs.find(l.signal);
    if (it == inputs.end() || it->second != l.value) return false;
  }
  return true;
}

std::size_t FsmSpec::state_index(std::string_view state) const {
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i] == state) return i;
  }
  throw Error("unknown state '" + std::string(state) + "'");
}

std::size_t FsmSpec::input_index(std::string_view signal) const {
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].name == signal) return i;
  }
  throw Error("unknown signal '" + std::string(signal) + "'");
}

void validate(FsmSpec& fsm) {
  if (fsm.states.empty()) throw Error("FSM has no states");
  std::set<std::string> names;
  for (const auto& s : fsm.states) {
    if (s.empty()) throw Error("empty state name");
    if (s == "ERROR") throw Error("state name 'ERROR' is reserved for the terminal error state");
    if (!names.insert(s).second) throw Error("duplicate state '" + s + "'");
  }
  if (!names.count(fsm.reset_state)) throw Error("unknown state '" + fsm.reset_state + "' used as reset state");

  std::set<std::string> signals;
  auto check_signal = [&](const SignalDecl& d, const char* kind) {
    if (!is_identifier(d.name) || kReservedNames.count(d.name) || d.name.ends_with("_e")) {
      throw Error(std::string(kind) + " name '" + d.name + "' is not a usable identifier");
    }
    if (d.width == 0 || d.width > 32) throw Error(std::string(kind) + " '" + d.name + "' has unsupported width");
    if (!signals.insert(d.name).second) throw Error("duplicate signal '" + d.name + "'");
  };
  for (const auto& d : fsm.inputs) check_signal(d, "input");
  for (const auto& d : fsm.outputs) check_signal(d, "output");

  auto find_decl = [](const std::vector<SignalDecl>& decls, const std::string& n) -> const SignalDecl* {
    for (const auto& d : decls) {
      if (d.name == n) return &d;
    }
    return nullptr;
  };
  auto check_outputs = [&](const Assignment& values, const std::string& where) {
    for (const auto& [sig, val] : values) {
      const SignalDecl* d = find_decl(fsm.outputs, sig);
      if (!d) throw Error("unknown output signal '" + sig + "' in " + where);
      if (val > width_mask(d->width)) throw Error("value " + std::to_string(val) + " does not fit output '" + sig + "'");
    }
  };

  for (std::size_t i = 0; i < fsm.transitions.size(); ++i) {
    const auto& t = fsm.transitions[i];
    const std::string where = "transition #" + std::to_string(i) + " (" + t.from + " -> " + t.to + ")";
    if (!names.count(t.from)) throw Error("unknown state '" + t.from + "' in " + where);
    if (!names.count(t.to)) throw Error("unknown state '" + t.to + "' in " + where);
    std::set<std::string> used;
    for (const auto& l : t.guard.literals) {
      const SignalDecl* d = find_decl(fsm.inputs, l.signal);
      if (!d) throw Error("unknown signal '" + l.signal + "' in " + where);
      if (!used.insert(l.signal).second) throw Error("signal '" + l.signal + "' repeated in guard of " + where);
      if (l.value > width_mask(d->width)) {
        throw Error("value " + std::to_string(l.value) + " does not fit signal '" + l.signal + "' in " + where);
      }
    }
    check_outputs(t.outputs, where);
  }
  for (const auto& [state, values] : fsm.state_outputs) {
    if (!names.count(state)) throw Error("unknown state '" + state + "' in state_outputs");
    check_outputs(values, "state_outputs of " + state);
  }

  for (std::size_t i = 0; i < fsm.transitions.size(); ++i) {
    for (std::size_t j = i + 1; j < fsm.transitions.size(); ++j) {
      const auto& a = fsm.transitions[i];
      const auto& b = fsm.transitions[j];
      if (a.from != b.from) continue;
      const bool both_default = a.guard.is_default() && b.guard.is_default();
      const bool explicit_pair = !a.guard.is_default() && !b.guard.is_default();
      if (both_default || (explicit_pair && guards_overlap(a.guard, b.guard))) {
        throw Error("nondeterministic guards in state '" + a.from + "': transition #" + std::to_string(i) + " [" +
                    a.guard.to_string() + "] overlaps transition #" + std::to_string(j) + " [" +
                    b.guard.to_string() + "]");
      }
    }
  }

  // Reachability from reset.
  std::vector<bool> reached(fsm.states.size(), false);
  std::deque<std::size_t> work{fsm.state_index(fsm.reset_state)};
  reached[work.front()] = true;
  while (!work.empty()) {
    const std::size_t s = work.front();
    work.pop_front();
    for (const auto& t : fsm.transitions) {
      if (fsm.state_index(t.from) != s) continue;
      const std::size_t to = fsm.state_index(t.to);
      if (!reached[to]) {
        reached[to] = true;
        work.push_back(to);
      }
    }
  }
  for (std::size_t s = 0; s < fsm.states.size(); ++s) {
    if (!reached[s]) fsm.warnings.push_back("state '" + fsm.states[s] + "' is unreachable from reset");
  }
  if (fsm.states.size() == 1) {
    fsm.warnings.push_back("single-state FSM: hardening can only tell the state apart from ERROR");
  }

  const auto refs = referenced_signals(fsm);
  for (std::size_t s = 0; s < fsm.states.size(); ++s) {
    if (state_is_complete(fsm, s, refs[s])) continue;
    if (fsm.complete_with_self_loops) {
      fsm.warnings.push_back("state '" + fsm.states[s] + "' does not cover every input; completed with a self-loop");
    } else {
      fsm.warnings.push_back("state '" + fsm.states[s] + "' does not cover every input; uncovered inputs are invalid");
    }
  }
}

FsmSpec parse_fsm(std::string_view source, FsmFormat format) {
  FsmSpec fsm = format == FsmFormat::kKiss2 ? parse_kiss2(source) : parse_json(source);
  validate(fsm);
  return fsm;
}

FsmSpec load_fsm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::filesystem::filesystem_error("cannot open FSM file", path, std::make_error_code(std::errc::no_such_file_or_directory));
  std::ostringstream buf;
  buf << in.rdbuf();
  const auto ext = path.extension().string();
  const FsmFormat format = (ext == ".kiss2" || ext == ".kiss") ? FsmFormat::kKiss2 : FsmFormat::kJson;
  return parse_fsm(buf.str(), format);
}

nlohmann::ordered_json to_json(const FsmSpec& fsm) {
  ordered_json j;
  j["name"] = fsm.name;
  j["states"] = fsm.states;
  j["reset"] = fsm.reset_state;
  auto signals = [](const std::vector<SignalDecl>& decls) {
    ordered_json arr = ordered_json::array();
    for (const auto& d : decls) arr.push_back({{"name", d.name}, {"width", d.width}});
    return arr;
  };
  j["inputs"] = signals(fsm.inputs);
  j["outputs"] = signals(fsm.outputs);
  j["complete"] = fsm.complete_with_self_loops;
  ordered_json transitions = ordered_json::array();
  for (const auto& t : fsm.transitions) {
    ordered_json guard = ordered_json::object();
    for (const auto& l : t.guard.literals) guard[l.signal] = l.value;
    ordered_json tj{{"from", t.from}, {"guard", guard}, {"to", t.to}};
    if (!t.outputs.empty()) tj["outputs"] = t.outputs;
    transitions.push_back(tj);
  }
  j["transitions"] = transitions;
  if (!fsm.state_outputs.empty()) {
    ordered_json so = ordered_json::object();
    for (const auto& s : fsm.states) {
      auto it = fsm.state_outputs.find(s);
      if (it != fsm.state_outputs.end()) so[s] = it->second;
    }
    j["state_outputs"] = so;
  }
  return j;
}

std::vector<std::vector<std::size_t>> referenced_signals(const FsmSpec& fsm) {
  std::vector<std::set<std::size_t>> sets(fsm.states.size());
  for (const auto& t : fsm.transitions) {
    for (const auto& l : t.guard.literals) sets[fsm.state_index(t.from)].insert(fsm.input_index(l.signal));
  }
  std::vector<std::vector<std::size_t>> out;
  for (const auto& s : sets) out.emplace_back(s.begin(), s.end());
  return out;
}

std::vector<CfgEdge> extract_cfg(const FsmSpec& fsm) {
  std::vector<CfgEdge> edges;
  for (std::size_t i = 0; i < fsm.transitions.size(); ++i) {
    const auto& t = fsm.transitions[i];
    edges.push_back({fsm.state_index(t.from), t.guard, fsm.state_index(t.to), i});
  }
  if (fsm.complete_with_self_loops) {
    const auto refs = referenced_signals(fsm);
    for (std::size_t s = 0; s < fsm.states.size(); ++s) {
      if (!state_is_complete(fsm, s, refs[s])) edges.push_back({s, ControlPredicate{}, s, std::nullopt});
    }
  }
  return edges;
}

std::optional<std::size_t> fire(const FsmSpec& fsm, const std::vector<CfgEdge>& edges, std::size_t state,
                                const Assignment& inputs) {
  (void)fsm;
  std::optional<std::size_t> fallback;
  for (std::size_t e = 0; e < edges.size(); ++e) {
    if (edges[e].from != state) continue;
    if (edges[e].guard.is_default()) {
      // An explicit default edge precedes the implicit self-loop in edge order.
      if (!fallback) fallback = e;
      continue;
    }
    if (matches(edges[e].guard, inputs)) return e;
  }
  return fallback;
}

std::vector<GuardConfiguration> enumerate_configurations(const FsmSpec& fsm, const std::vector<CfgEdge>& edges) {
  const auto refs = referenced_signals(fsm);
  std::vector<GuardConfiguration> configs;
  for (std::size_t s = 0; s < fsm.states.size(); ++s) {
    unsigned bits = 0;
    for (auto r : refs[s]) bits += fsm.inputs[r].width;
    if (bits > kMaxGuardBitsPerState) {
      throw Error("guards of state '" + fsm.states[s] + "' span " + std::to_string(bits) +
                  " input bits; at most " + std::to_string(kMaxGuardBitsPerState) + " are supported");
    }
    for (std::uint64_t code = 0; code < (std::uint64_t{1} << bits); ++code) {
      GuardConfiguration c;
      c.state = s;
      Assignment a;
      unsigned shift = 0;
      for (auto r : refs[s]) {
        const std::uint64_t v = (code >> shift) & width_mask(fsm.inputs[r].width);
        c.values.emplace_back(r, v);
        a[fsm.inputs[r].name] = v;
        shift += fsm.inputs[r].width;
      }
      c.edge = fire(fsm, edges, s, a);
      configs.push_back(std::move(c));
    }
  }
  return configs;
}

std::vector<std::string> simulate_spec(const FsmSpec& fsm, std::span<const Assignment> trace) {
  const auto edges = extract_cfg(fsm);
  std::vector<std::string> trajectory{fsm.reset_state};
  std::size_t state = fsm.state_index(fsm.reset_state);
  for (std::size_t step = 0; step < trace.size(); ++step) {
    const Assignment& a = trace[step];
    for (const auto& [sig, val] : a) {
      const auto& d = fsm.input(sig);
      if (val > width_mask(d.width)) throw Error("step " + std::to_string(step) + ": value does not fit '" + sig + "'");
    }
    for (const auto& d : fsm.inputs) {
      if (!a.count(d.name)) throw Error("step " + std::to_string(step) + ": missing value for signal '" + d.name + "'");
    }
    const auto e = fire(fsm, edges, state, a);
    if (!e) {
      throw Error("step " + std::to_string(step) + ": no transition from state '" + fsm.states[state] +
                  "' matches and the FSM has no default edge");
    }
    state = edges[*e].to;
    trajectory.push_back(fsm.states[state]);
  }
  return trajectory;
}

Assignment spec_outputs(const FsmSpec& fsm, std::size_t state, const Assignment& inputs) {
  Assignment out;
  for (const auto& d : fsm.outputs) out[d.name] = 0;
  if (auto it = fsm.state_outputs.find(fsm.states[state]); it != fsm.state_outputs.end()) {
    for (const auto& [k, v] : it->second) out[k] = v;
  }
  const auto edges = extract_cfg(fsm);
  if (auto e = fire(fsm, edges, state, inputs); e && edges[*e].transition) {
    for (const auto& [k, v] : fsm.transitions[*edges[*e].transition].outputs) out[k] = v;
  }
  return out;
}

std::vector<Assignment> random_trace(const FsmSpec& fsm, std::size_t length, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Assignment> trace(length);
  for (auto& a : trace) {
    for (const auto& d : fsm.inputs) a[d.name] = rng() & width_mask(d.width);
  }
  return trace;
}

std::vector<Assignment> cover_trace(const FsmSpec& fsm) {
  const auto edges = extract_cfg(fsm);
  const auto configs = enumerate_configurations(fsm, edges);
  std::vector<std::vector<std::size_t>> by_state(fsm.states.size());
  for (std::size_t c = 0; c < configs.size(); ++c) {
    if (configs[c].edge) by_state[configs[c].state].push_back(c);
  }
  auto assignment_of = [&](std::size_t c) {
    Assignment a;
    for (const auto& d : fsm.inputs) a[d.name] = 0;
    for (const auto& [idx, v] : configs[c].values) a[fsm.inputs[idx].name] = v;
    return a;
  };
  // reach[a][b]: b reachable from a (reflexive).
  const std::size_t n = fsm.states.size();
  std::vector<std::vector<bool>> reach(n, std::vector<bool>(n, false));
  for (std::size_t a = 0; a < n; ++a) {
    std::deque<std::size_t> q{a};
    reach[a][a] = true;
    while (!q.empty()) {
      const std::size_t s = q.front();
      q.pop_front();
      for (auto c : by_state[s]) {
        const std::size_t to = edges[*configs[c].edge].to;
        if (!reach[a][to]) {
          reach[a][to] = true;
          q.push_back(to);
        }
      }
    }
  }
  std::vector<bool> covered(configs.size(), false);
  // Taking c must not strand another uncovered configuration that is still reachable.
  auto safe = [&](std::size_t from, std::size_t c) {
    const std::size_t to = edges[*configs[c].edge].to;
    for (std::size_t o = 0; o < configs.size(); ++o) {
      if (o == c || covered[o] || !configs[o].edge) continue;
      if (reach[from][configs[o].state] && !reach[to][configs[o].state]) return false;
    }
    return true;
  };
  std::vector<Assignment> trace;
  std::size_t current = fsm.state_index(fsm.reset_state);
  for (;;) {
    // Breadth-first search for the nearest state with an uncovered configuration,
    // preferring one whose configuration keeps the rest reachable.
    std::vector<std::optional<std::size_t>> via(fsm.states.size());  // config used to enter
    std::vector<bool> seen(fsm.states.size(), false);
    std::deque<std::size_t> queue{current};
    seen[current] = true;
    std::optional<std::pair<std::size_t, std::size_t>> target;  // (state, config)
    std::optional<std::pair<std::size_t, std::size_t>> fallback;
    while (!queue.empty() && !target) {
      const std::size_t s = queue.front();
      queue.pop_front();
      for (auto c : by_state[s]) {
        if (covered[c]) continue;
        if (safe(current, c)) {
          target = {s, c};
          break;
        }
        if (!fallback) fallback = {s, c};
      }
      if (target) break;
      for (auto c : by_state[s]) {
        const std::size_t to = edges[*configs[c].edge].to;
        if (!seen[to]) {
          seen[to] = true;
          via[to] = c;
          queue.push_back(to);
        }
      }
    }
    if (!target) target = fallback;
    if (!target) break;
    std::vector<std::size_t> path;
    for (std::size_t s = target->first; s != current;) {
      const std::size_t c = *via[s];
      path.push_back(c);
      s = configs[c].state;
    }
    std::reverse(path.begin(), path.end());
    path.push_back(target->second);
    for (auto c : path) {
      covered[c] = true;
      trace.push_back(assignment_of(c));
      current = edges[*configs[c].edge].to;
    }
  }
  return trace;
}

}  // namespace hardfsm
