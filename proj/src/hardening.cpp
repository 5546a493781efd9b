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

#include "hardfsm/hardening.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <set>

namespace hardfsm {

namespace {

constexpr unsigned kBlockBits = 32;
constexpr unsigned kLanes = 4;
constexpr unsigned kMaxBlocks = 256;

std::string hex32(std::uint32_t v) { return BitVector::from_uint(v, 32).to_hex(); }

}  // namespace

// ---- codebooks ----------------------------------------------------------

std::size_t CodeBooks::control_width() const {
  std::size_t w = 0;
  for (const auto& c : inputs) w += c.width();
  return w;
}

const CodeBook& CodeBooks::input(std::string_view name) const {
  for (std::size_t i = 0; i < input_names.size(); ++i) {
    if (input_names[i] == name) return inputs[i];
  }
  throw Error("no codebook for input '" + std::string(name) + "'");
}

nlohmann::ordered_json CodeBooks::to_json() const {
  nlohmann::ordered_json j;
  j["state"] = state.to_json();
  j["inputs"] = nlohmann::ordered_json::object();
  for (std::size_t i = 0; i < inputs.size(); ++i) j["inputs"][input_names[i]] = inputs[i].to_json();
  return j;
}

CodeBooks CodeBooks::from_json(const nlohmann::ordered_json& j) {
  if (!j.is_object() || !j.contains("state")) throw Error("codebook JSON: missing 'state'");
  CodeBooks c;
  c.state = CodeBook::from_json(j.at("state"));
  if (j.contains("inputs")) {
    for (const auto& [name, book] : j.at("inputs").items()) {
      c.input_names.push_back(name);
      c.inputs.push_back(CodeBook::from_json(book));
    }
  }
  return c;
}

CodeBooks generate_codebooks(const FsmSpec& fsm, unsigned protection_level, std::uint64_t seed) {
  CodeBooks c;
  std::vector<std::string> symbols = fsm.states;
  symbols.push_back("ERROR");
  c.state = build_codebook(symbols, "ERROR", protection_level, mix_seed(seed, 0));
  for (std::size_t i = 0; i < fsm.inputs.size(); ++i) {
    const auto& d = fsm.inputs[i];
    if (d.width > kMaxEncodedSignalWidth) {
      throw Error("input '" + d.name + "' is " + std::to_string(d.width) + " bits wide; at most " +
                  std::to_string(kMaxEncodedSignalWidth) + " bits can be encoded");
    }
    std::vector<std::string> values{"INVALID"};
    for (std::uint64_t v = 0; v < (std::uint64_t{1} << d.width); ++v) values.push_back(std::to_string(v));
    c.input_names.push_back(d.name);
    c.inputs.push_back(build_codebook(values, "INVALID", protection_level, mix_seed(seed, i + 1)));
  }
  return c;
}

// ---- layout -------------------------------------------------------------

std::size_t BlockLayout::modifier_width() const {
  std::size_t w = 0;
  for (const auto& lanes : modifier_lanes) w += 8 * lanes.size();
  return w;
}

std::vector<BitSlot> BlockLayout::modifier_slots() const {
  std::vector<BitSlot> slots;
  for (unsigned b = 0; b < modifier_lanes.size(); ++b) {
    for (unsigned lane : modifier_lanes[b]) {
      for (unsigned i = 0; i < 8; ++i) slots.push_back({b, 8 * lane + i});
    }
  }
  return slots;
}

std::vector<BitSlot> BlockLayout::error_slots() const {
  std::vector<BitSlot> slots;
  for (unsigned b = 0; b < block_count; ++b) {
    for (unsigned p = kBlockBits - error_bits; p < kBlockBits; ++p) slots.push_back({b, p});
  }
  return slots;
}

std::vector<std::uint32_t> single_fault_patterns(const XorCircuit& circuit) {
  std::vector<std::uint32_t> patterns;
  std::vector<std::uint8_t> values(32 + circuit.nodes.size());
  for (std::size_t flipped = 0; flipped < circuit.nodes.size(); ++flipped) {
    std::fill(values.begin(), values.end(), 0);
    for (std::size_t n = 0; n < circuit.nodes.size(); ++n) {
      values[32 + n] = (values[circuit.nodes[n].lhs] ^ values[circuit.nodes[n].rhs]) ^ (n == flipped ? 1 : 0);
    }
    std::uint32_t out = 0;
    for (unsigned i = 0; i < 32; ++i) out |= static_cast<std::uint32_t>(values[circuit.outputs[i]]) << i;
    patterns.push_back(out);
  }
  for (unsigned i = 0; i < 32; ++i) patterns.push_back(circuit.evaluate(std::uint32_t{1} << i));
  return patterns;
}

namespace {

unsigned lane_mask_of(std::uint32_t bits) {
  unsigned m = 0;
  for (unsigned lane = 0; lane < kLanes; ++lane) {
    if ((bits >> (8 * lane)) & 0xffu) m |= 1u << lane;
  }
  return m;
}

// (collisions, spread): faults that flip >= w chosen bits and no error bit,
// then the sum of squared hit counts as a tie breaker.
std::pair<std::size_t, std::size_t> placement_cost(const std::vector<std::uint32_t>& patterns, std::uint32_t chosen,
                                                   unsigned w) {
  std::size_t bad = 0;
  std::size_t spread = 0;
  for (auto p : patterns) {
    const auto hits = static_cast<std::size_t>(std::popcount(p & chosen));
    if (hits >= w) ++bad;
    spread += hits * hits;
  }
  return {bad, spread};
}

std::uint32_t place_state_bits(unsigned count, unsigned e, const PlacementHint* hint) {
  const std::uint32_t err = e == 0 ? 0 : static_cast<std::uint32_t>((std::uint64_t{0xffffffff} << (kBlockBits - e)));
  const std::uint32_t free_bits = ~err;
  if (count == 0) return 0;
  if (!hint || !hint->circuit) {
    return count >= 32 ? 0xffffffffu : (std::uint32_t{1} << count) - 1;
  }
  std::vector<std::uint32_t> patterns;
  for (auto p : single_fault_patterns(*hint->circuit)) {
    if ((p & err) == 0) patterns.push_back(p);
  }
  const unsigned w = std::max(1u, hint->protection_level);
  const unsigned err_lanes = lane_mask_of(err);
  // Lane subsets with room for the bits and the fewest constrained lanes overall.
  unsigned best_lanes = kLanes + 1;
  std::vector<unsigned> candidates;
  for (unsigned set = 1; set < (1u << kLanes); ++set) {
    std::uint32_t room = 0;
    for (unsigned lane = 0; lane < kLanes; ++lane) {
      if (set & (1u << lane)) room |= std::uint32_t{0xff} << (8 * lane);
    }
    if (static_cast<unsigned>(std::popcount(room & free_bits)) < count) continue;
    const unsigned used = static_cast<unsigned>(std::popcount(set | err_lanes));
    if (used < best_lanes) {
      best_lanes = used;
      candidates.clear();
    }
    if (used == best_lanes) candidates.push_back(set);
  }
  std::optional<std::pair<std::pair<std::size_t, std::size_t>, std::uint32_t>> best;
  for (unsigned set : candidates) {
    std::uint32_t room = 0;
    for (unsigned lane = 0; lane < kLanes; ++lane) {
      if (set & (1u << lane)) room |= std::uint32_t{0xff} << (8 * lane);
    }
    room &= free_bits;
    std::uint32_t chosen = 0;
    for (unsigned k = 0; k < count; ++k) {
      std::optional<std::pair<std::pair<std::size_t, std::size_t>, unsigned>> pick;
      for (unsigned p = 0; p < kBlockBits; ++p) {
        if (!((room >> p) & 1u) || ((chosen >> p) & 1u)) continue;
        const auto c = placement_cost(patterns, chosen | (std::uint32_t{1} << p), w);
        if (!pick || c < pick->first) pick = {c, p};
      }
      chosen |= std::uint32_t{1} << pick->second;
    }
    // Pairwise swaps until no swap lowers the cost.
    auto cost = placement_cost(patterns, chosen, w);
    for (bool improved = true; improved;) {
      improved = false;
      for (unsigned out = 0; out < kBlockBits && !improved; ++out) {
        if (!((chosen >> out) & 1u)) continue;
        for (unsigned in = 0; in < kBlockBits && !improved; ++in) {
          if (!((room >> in) & 1u) || ((chosen >> in) & 1u)) continue;
          const std::uint32_t trial = (chosen & ~(std::uint32_t{1} << out)) | (std::uint32_t{1} << in);
          const auto c = placement_cost(patterns, trial, w);
          if (c < cost) {
            chosen = trial;
            cost = c;
            improved = true;
          }
        }
      }
    }
    if (!best || cost < best->first) best = {cost, chosen};
  }
  return best->second;
}

std::optional<BlockLayout> try_layout(std::size_t state_width, std::size_t control_width, unsigned e, unsigned k,
                                      const PlacementHint* hint) {
  BlockLayout l;
  l.block_count = k;
  l.error_bits = e;
  std::vector<unsigned> fill(k, 0);
  std::size_t bit = 0;
  for (std::size_t i = 0; i < state_width; ++i, ++bit) {
    const unsigned b = bit % k;
    l.state_in.push_back({b, fill[b]++});
  }
  for (std::size_t i = 0; i < control_width; ++i, ++bit) {
    const unsigned b = bit % k;
    l.control_in.push_back({b, fill[b]++});
  }
  std::vector<unsigned> out_count(k, 0);
  for (std::size_t i = 0; i < state_width; ++i) ++out_count[i % k];
  std::vector<std::vector<unsigned>> positions(k);
  for (unsigned b = 0; b < k; ++b) {
    if (out_count[b] + e > kBlockBits || fill[b] > kBlockBits) return std::nullopt;
    const std::uint32_t chosen = place_state_bits(out_count[b], e, hint);
    for (unsigned p = 0; p < kBlockBits; ++p) {
      if ((chosen >> p) & 1u) positions[b].push_back(p);
    }
    const unsigned data_lanes = (fill[b] + 7) / 8;
    std::set<unsigned> constrained;
    for (unsigned p : positions[b]) constrained.insert(p / 8);
    for (unsigned p = kBlockBits - e; p < kBlockBits; ++p) constrained.insert(p / 8);
    if (data_lanes + constrained.size() > kLanes) return std::nullopt;
    std::vector<unsigned> lanes;
    for (unsigned i = 0; i < constrained.size(); ++i) lanes.push_back(data_lanes + i);
    l.modifier_lanes.push_back(std::move(lanes));
  }
  std::vector<unsigned> used(k, 0);
  for (std::size_t i = 0; i < state_width; ++i) {
    const unsigned b = i % k;
    l.state_out.push_back({b, positions[b][used[b]++]});
  }
  return l;
}

}  // namespace

BlockLayout plan_layout(std::size_t state_width, std::size_t control_width, unsigned error_bits,
                        unsigned block_count, const PlacementHint* hint) {
  if (state_width == 0) throw Error("layout: state encoding has zero width");
  if (error_bits > kBlockBits) throw Error("layout: more error bits than a block holds");
  if (block_count != 0) {
    auto l = try_layout(state_width, control_width, error_bits, block_count, hint);
    if (!l) {
      throw Error("layout: " + std::to_string(state_width) + " state bits, " + std::to_string(control_width) +
                  " control bits and " + std::to_string(error_bits) + " error bits per block do not fit in " +
                  std::to_string(block_count) + " block(s) after byte alignment");
    }
    return *l;
  }
  for (unsigned k = 1; k <= kMaxBlocks; ++k) {
    if (auto l = try_layout(state_width, control_width, error_bits, k, hint)) return *l;
  }
  throw Error("layout: no feasible packing with up to " + std::to_string(kMaxBlocks) + " blocks");
}

std::vector<std::uint32_t> pack_blocks(const BlockLayout& layout, const BitVector& state, const BitVector& control,
                                       const BitVector& modifier) {
  if (state.size() != layout.state_in.size() || control.size() != layout.control_in.size() ||
      modifier.size() != layout.modifier_width()) {
    throw Error("pack_blocks: operand widths do not match the layout");
  }
  std::vector<std::uint32_t> blocks(layout.block_count, 0);
  auto put = [&](BitSlot s, bool v) {
    if (v) blocks[s.block] |= std::uint32_t{1} << s.position;
  };
  for (std::size_t i = 0; i < state.size(); ++i) put(layout.state_in[i], state.get(i));
  for (std::size_t i = 0; i < control.size(); ++i) put(layout.control_in[i], control.get(i));
  const auto mods = layout.modifier_slots();
  for (std::size_t i = 0; i < mods.size(); ++i) put(mods[i], modifier.get(i));
  return blocks;
}

std::vector<TransitionPlan> solve_modifiers(const BlockLayout& layout, const std::vector<PlanInput>& inputs,
                                            const MdsSpec& mds) {
  const BitMatrix& m = mds.binary_form();
  const auto mod_slots = layout.modifier_slots();
  const auto err_slots = layout.error_slots();
  std::vector<TransitionPlan> plans;
  for (const auto& in : inputs) {
    if (in.next.size() != layout.state_out.size()) throw Error("solve: next-state width does not match the layout");
    const auto data = pack_blocks(layout, in.state, in.control, BitVector(layout.modifier_width()));
    BitVector modifier(layout.modifier_width());
    for (unsigned b = 0; b < layout.block_count; ++b) {
      // Rows: constrained output positions and their targets.
      std::vector<std::pair<unsigned, bool>> rows;
      for (std::size_t i = 0; i < layout.state_out.size(); ++i) {
        if (layout.state_out[i].block == b) rows.emplace_back(layout.state_out[i].position, in.next.get(i));
      }
      for (const auto& s : err_slots) {
        if (s.block == b) rows.emplace_back(s.position, true);
      }
      std::vector<std::size_t> cols;
      for (std::size_t i = 0; i < mod_slots.size(); ++i) {
        if (mod_slots[i].block == b) cols.push_back(i);
      }
      const std::uint32_t known = mds.apply_binary(data[b]);
      BitMatrix a(rows.size(), cols.size());
      BitVector rhs(rows.size());
      for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < cols.size(); ++c) a.set(r, c, m.get(rows[r].first, mod_slots[cols[c]].position));
        rhs.set(r, rows[r].second ^ ((known >> rows[r].first) & 1u));
      }
      const auto x = solve_gf2(a, rhs);
      if (!x) {
        throw Error("no modifier for transition " + in.label + " in block " + std::to_string(b) + ": " +
                    std::to_string(rows.size()) + " constrained output bits, modifier system rank " +
                    std::to_string(a.rank()) + " of " + std::to_string(cols.size()) + " columns");
      }
      for (std::size_t c = 0; c < cols.size(); ++c) modifier.set(cols[c], x->get(c));
    }
    TransitionPlan p;
    p.state_code = in.state;
    p.control_code = in.control;
    p.next_code = in.next;
    p.modifier = std::move(modifier);
    plans.push_back(std::move(p));
  }
  return plans;
}

bool verify_plan(const BlockLayout& layout, const TransitionPlan& plan, const MdsSpec& mds) {
  const auto blocks = pack_blocks(layout, plan.state_code, plan.control_code, plan.modifier);
  std::vector<std::uint32_t> out;
  for (auto v : blocks) out.push_back(mds_apply(mds, v));
  for (std::size_t i = 0; i < layout.state_out.size(); ++i) {
    const auto s = layout.state_out[i];
    if (((out[s.block] >> s.position) & 1u) != static_cast<unsigned>(plan.next_code.get(i))) return false;
  }
  for (const auto& s : layout.error_slots()) {
    if (((out[s.block] >> s.position) & 1u) == 0) return false;
  }
  return true;
}

BitVector masked_control(const FsmSpec& fsm, const CodeBooks& codes, const GuardConfiguration& config) {
  BitVector word(codes.control_width());
  std::vector<std::size_t> offset(fsm.inputs.size(), 0);
  for (std::size_t i = 1; i < fsm.inputs.size(); ++i) offset[i] = offset[i - 1] + codes.inputs[i - 1].width();
  for (const auto& [idx, value] : config.values) {
    const auto& cw = codes.inputs[idx].codeword(std::to_string(value));
    for (std::size_t b = 0; b < cw.size(); ++b) word.set(offset[idx] + b, cw.get(b));
  }
  return word;
}

// ---- netlist construction -------------------------------------------------

namespace {

class Builder {
 public:
  explicit Builder(Netlist& n) : n_(n) {}

  NetId const0() {
    if (!c0_) c0_ = n_.add_gate(GateKind::kConst0, {}, StageTag::kMix, "const0");
    return *c0_;
  }
  NetId const1() {
    if (!c1_) c1_ = n_.add_gate(GateKind::kConst1, {}, StageTag::kMatch, "const1");
    return *c1_;
  }

  // Balanced reduction; `empty` is used when there are no terms.
  NetId tree(GateKind kind, std::vector<NetId> terms, StageTag tag, const std::string& name, NetId empty) {
    if (terms.empty()) return empty;
    unsigned level = 0;
    while (terms.size() > 1) {
      std::vector<NetId> next;
      for (std::size_t i = 0; i + 1 < terms.size(); i += 2) {
        const bool last = terms.size() == 2;
        next.push_back(n_.add_gate(kind, {terms[i], terms[i + 1]}, tag,
                                   last ? name : name + "_t" + std::to_string(level) + "_" + std::to_string(i / 2)));
      }
      if (terms.size() % 2) next.push_back(terms.back());
      terms = std::move(next);
      ++level;
    }
    return terms.front();
  }

 private:
  Netlist& n_;
  std::optional<NetId> c0_;
  std::optional<NetId> c1_;
};

// Comparators and modifier selection for one copy of stages 1 and 2.
struct SelectCopy {
  std::vector<NetId> state_match;   // per FSM state
  std::vector<NetId> config_match;  // per plan
  std::vector<NetId> modifier;      // per modifier bit
};

}  // namespace

Netlist build_hardened_netlist(const FsmSpec& fsm, const std::vector<CfgEdge>& edges,
                               const std::vector<GuardConfiguration>& configurations,
                               const std::vector<TransitionPlan>& plans, const HardeningConfig& config,
                               const CodeBooks& codes, const BlockLayout& layout, const MdsSpec& mds) {
  Netlist n(fsm.name + "_hardened");
  Builder b(n);
  const std::size_t sw = codes.state.width();
  const auto refs = referenced_signals(fsm);

  std::vector<std::vector<NetId>> ctrl;
  for (std::size_t i = 0; i < fsm.inputs.size(); ++i) {
    ctrl.push_back(n.add_input(fsm.inputs[i].name + "_e", codes.inputs[i].width()));
  }
  std::vector<NetId> q;
  for (std::size_t i = 0; i < sw; ++i) q.push_back(n.add_net("state_q" + std::to_string(i)));

  const unsigned copies = config.encoded_mux_selectors ? config.protection_level : 1;
  std::vector<SelectCopy> sel(copies);
  for (unsigned c = 0; c < copies; ++c) {
    const std::string pre = "c" + std::to_string(c) + "_";
    std::map<NetId, NetId> inverted;
    auto inv = [&](NetId net) {
      auto it = inverted.find(net);
      if (it != inverted.end()) return it->second;
      const NetId out = n.add_gate(GateKind::kNot, {net}, StageTag::kMatch, pre + "n_" + n.net_name(net));
      inverted.emplace(net, out);
      return out;
    };
    auto equals = [&](const std::vector<NetId>& bits, const BitVector& word, const std::string& name) {
      std::vector<NetId> terms;
      for (std::size_t i = 0; i < bits.size(); ++i) terms.push_back(word.get(i) ? bits[i] : inv(bits[i]));
      return b.tree(GateKind::kAnd, terms, StageTag::kMatch, name, b.const1());
    };
    auto& s = sel[c];
    for (std::size_t st = 0; st < fsm.states.size(); ++st) {
      s.state_match.push_back(equals(q, codes.state.codeword(fsm.states[st]), pre + "is_" + fsm.states[st]));
    }
    std::map<std::pair<std::size_t, std::uint64_t>, NetId> literal;
    for (const auto& p : plans) {
      const auto& cfg = configurations[p.configuration];
      std::vector<NetId> terms{s.state_match[cfg.state]};
      for (const auto& [idx, value] : cfg.values) {
        auto key = std::make_pair(idx, value);
        if (!literal.count(key)) {
          literal[key] = equals(ctrl[idx], codes.inputs[idx].codeword(std::to_string(value)),
                                pre + fsm.inputs[idx].name + "_is_" + std::to_string(value));
        }
        terms.push_back(literal[key]);
      }
      s.config_match.push_back(terms.size() == 1 ? terms.front()
                                                 : b.tree(GateKind::kAnd, terms, StageTag::kMatch,
                                                          pre + "cfg" + std::to_string(p.configuration),
                                                          b.const1()));
    }
    // Stage 2: one MUX per plan and modifier bit whose value changes the chain.
    // Each copy drives its chains from its own constants; a shared constant
    // would be one net that every copy agrees on.
    std::optional<NetId> zero;
    std::optional<NetId> one_net;
    auto constant = [&](bool v) {
      auto& slot = v ? one_net : zero;
      if (!slot) slot = n.add_gate(v ? GateKind::kConst1 : GateKind::kConst0, {}, StageTag::kModSelect,
                                   pre + (v ? "one" : "zero"));
      return *slot;
    };
    for (std::size_t bit = 0; bit < layout.modifier_width(); ++bit) {
      std::optional<NetId> v;  // unset while the chain is still constant 0
      for (std::size_t p = 0; p < plans.size(); ++p) {
        const bool one = plans[p].modifier.get(bit);
        if (!v && !one) continue;
        v = n.add_gate(GateKind::kMux, {s.config_match[p], v ? *v : constant(false), constant(one)},
                       StageTag::kModSelect, pre + "mod" + std::to_string(bit) + "_p" + std::to_string(p));
      }
      s.modifier.push_back(v ? *v : b.const0());
    }
  }

  // Stage 3: control fields a state does not reference are zeroed, then every
  // diffusion input gets its own buffer.
  std::vector<NetId> masked;
  for (std::size_t i = 0; i < fsm.inputs.size(); ++i) {
    std::vector<NetId> users;
    for (std::size_t st = 0; st < fsm.states.size(); ++st) {
      if (std::find(refs[st].begin(), refs[st].end(), i) != refs[st].end()) users.push_back(sel[0].state_match[st]);
    }
    if (users.size() == fsm.states.size()) {
      masked.insert(masked.end(), ctrl[i].begin(), ctrl[i].end());
      continue;
    }
    if (users.empty()) {
      masked.insert(masked.end(), ctrl[i].size(), b.const0());
      continue;
    }
    const NetId en = b.tree(GateKind::kOr, users, StageTag::kMix, fsm.inputs[i].name + "_used", b.const0());
    for (std::size_t k = 0; k < ctrl[i].size(); ++k) {
      masked.push_back(n.add_gate(GateKind::kAnd, {ctrl[i][k], en}, StageTag::kMix,
                                  fsm.inputs[i].name + "_m" + std::to_string(k)));
    }
  }
  std::vector<std::array<std::optional<NetId>, 32>> source(layout.block_count);
  for (std::size_t i = 0; i < sw; ++i) source[layout.state_in[i].block][layout.state_in[i].position] = q[i];
  for (std::size_t i = 0; i < masked.size(); ++i) {
    source[layout.control_in[i].block][layout.control_in[i].position] = masked[i];
  }
  const auto mod_slots = layout.modifier_slots();
  for (std::size_t i = 0; i < mod_slots.size(); ++i) {
    source[mod_slots[i].block][mod_slots[i].position] = sel[0].modifier[i];
  }

  // Stage 4: XOR-only diffusion, one instance per block.
  const XorCircuit& circuit = mds.circuit();
  std::vector<std::array<NetId, 32>> diffused(layout.block_count);
  for (unsigned blk = 0; blk < layout.block_count; ++blk) {
    const std::string pre = "b" + std::to_string(blk) + "_";
    std::array<NetId, 32> in{};
    for (unsigned p = 0; p < 32; ++p) {
      const auto& src = source[blk][p];
      in[p] = src && *src != b.const0()
                  ? n.add_gate(GateKind::kBuf, {*src}, StageTag::kMix, pre + "in" + std::to_string(p))
                  : b.const0();
    }
    std::vector<std::size_t> order(circuit.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return circuit.nodes[x].layer < circuit.nodes[y].layer; });
    std::vector<NetId> node_net(circuit.nodes.size());
    auto ref = [&](std::uint32_t r) { return r < 32 ? in[r] : node_net[r - 32]; };
    for (auto i : order) {
      const auto& node = circuit.nodes[i];
      node_net[i] = n.add_gate(GateKind::kXor, {ref(node.lhs), ref(node.rhs)}, StageTag::kDiffusion,
                               pre + "x" + std::to_string(node.layer) + "_" + std::to_string(i));
    }
    for (unsigned p = 0; p < 32; ++p) diffused[blk][p] = ref(circuit.outputs[p]);
  }

  // Stage 5: next-state concatenation and error-bit taps.
  std::vector<NetId> raw_next;
  for (std::size_t i = 0; i < sw; ++i) {
    const auto s = layout.state_out[i];
    raw_next.push_back(n.add_gate(GateKind::kBuf, {diffused[s.block][s.position]}, StageTag::kUnmix,
                                  "sn" + std::to_string(i)));
  }
  std::vector<NetId> checks;
  for (const auto& s : layout.error_slots()) {
    checks.push_back(n.add_gate(GateKind::kBuf, {diffused[s.block][s.position]}, StageTag::kUnmix,
                                "err" + std::to_string(s.block) + "_" + std::to_string(s.position)));
  }

  // Validity: some configuration must match; copies must agree.
  checks.push_back(b.tree(GateKind::kOr, sel[0].config_match, StageTag::kErrorLogic, "any_match", b.const0()));
  if (copies > 1) {
    std::vector<NetId> diffs;
    for (unsigned c = 1; c < copies; ++c) {
      for (std::size_t bit = 0; bit < layout.modifier_width(); ++bit) {
        if (sel[c].modifier[bit] == sel[0].modifier[bit]) continue;
        diffs.push_back(n.add_gate(GateKind::kXor, {sel[0].modifier[bit], sel[c].modifier[bit]},
                                   StageTag::kErrorLogic,
                                   "sel_diff" + std::to_string(c) + "_" + std::to_string(bit)));
      }
    }
    if (!diffs.empty()) {
      const NetId mismatch = b.tree(GateKind::kOr, diffs, StageTag::kErrorLogic, "sel_mismatch", b.const0());
      checks.push_back(n.add_gate(GateKind::kNot, {mismatch}, StageTag::kErrorLogic, "sel_agree"));
    }
  }

  // Stage 6: any cleared check forces the all-zeros ERROR word.
  const NetId ok = b.tree(GateKind::kAnd, checks, StageTag::kInfect, "next_ok", b.const1());
  const auto& reset_word = codes.state.codeword(fsm.reset_state);
  for (std::size_t i = 0; i < sw; ++i) {
    const NetId d = n.add_gate(GateKind::kAnd, {raw_next[i], ok}, StageTag::kInfect, "state_d" + std::to_string(i));
    n.add_flop(d, q[i], reset_word.get(i), StageTag::kStateReg);
  }

  const NetId valid = b.tree(GateKind::kOr, sel[0].state_match, StageTag::kErrorLogic, "state_valid", b.const0());
  const NetId alert = n.add_gate(GateKind::kNot, {valid}, StageTag::kErrorLogic, "alert");

  // Output decoder. Signals driven by some transition decode from the
  // configuration match lines, the rest from the state match lines.
  std::vector<std::pair<std::string, std::vector<NetId>>> outs;
  for (const auto& o : fsm.outputs) {
    bool mealy = false;
    for (const auto& t : fsm.transitions) mealy = mealy || t.outputs.count(o.name);
    std::vector<NetId> bits;
    for (unsigned k = 0; k < o.width; ++k) {
      std::vector<NetId> terms;
      auto moore = [&](std::size_t st) {
        auto it = fsm.state_outputs.find(fsm.states[st]);
        if (it == fsm.state_outputs.end()) return std::uint64_t{0};
        auto v = it->second.find(o.name);
        return v == it->second.end() ? std::uint64_t{0} : v->second;
      };
      if (mealy) {
        for (std::size_t p = 0; p < plans.size(); ++p) {
          const auto& edge = edges[plans[p].edge];
          std::uint64_t value = moore(edge.from);
          if (edge.transition) {
            const auto& t = fsm.transitions[*edge.transition];
            if (auto it = t.outputs.find(o.name); it != t.outputs.end()) value = it->second;
          }
          if ((value >> k) & 1u) terms.push_back(sel[0].config_match[p]);
        }
      } else {
        for (std::size_t st = 0; st < fsm.states.size(); ++st) {
          if ((moore(st) >> k) & 1u) terms.push_back(sel[0].state_match[st]);
        }
      }
      const std::string name = "out_" + o.name + "_" + std::to_string(k);
      NetId v = b.tree(GateKind::kOr, terms, StageTag::kOutput, name, b.const0());
      // Ports must not alias a net that already feeds another port.
      if (terms.size() <= 1) v = n.add_gate(GateKind::kBuf, {v}, StageTag::kOutput, name);
      bits.push_back(v);
    }
    outs.emplace_back(o.name, std::move(bits));
  }
  for (auto& [name, bits] : outs) n.add_output(name, std::move(bits));
  n.add_output("state_e", q);
  n.add_output("fsm_alert", {alert});
  n.levelize();
  return n;
}

// ---- pipeline -----------------------------------------------------------

HardenedDesign harden(const FsmSpec& fsm, const HardeningConfig& config) {
  if (config.protection_level < 2) {
    throw Error("protection level " + std::to_string(config.protection_level) +
                " has no redundancy to detect faults; use 2 or more");
  }
  HardenedDesign d;
  d.fsm = fsm;
  d.config = config;
  const MdsSpec& mds = find_mds(config.mds);
  d.edges = extract_cfg(fsm);
  d.configurations = enumerate_configurations(fsm, d.edges);
  d.codes = generate_codebooks(fsm, config.protection_level, config.seed);
  const PlacementHint hint{&mds.circuit(), config.protection_level};
  d.layout = plan_layout(d.codes.state.width(), d.codes.control_width(), config.effective_error_bits(),
                         config.block_count, &hint);

  std::vector<PlanInput> inputs;
  std::vector<std::size_t> which;
  for (std::size_t c = 0; c < d.configurations.size(); ++c) {
    const auto& cfg = d.configurations[c];
    if (!cfg.edge) continue;
    const auto& e = d.edges[*cfg.edge];
    std::string label = fsm.states[e.from] + " -> " + fsm.states[e.to];
    if (!cfg.values.empty()) {
      label += " [";
      for (std::size_t i = 0; i < cfg.values.size(); ++i) {
        label += (i ? ", " : "") + fsm.inputs[cfg.values[i].first].name + "=" + std::to_string(cfg.values[i].second);
      }
      label += "]";
    }
    inputs.push_back({d.codes.state.codeword(fsm.states[e.from]), masked_control(fsm, d.codes, cfg),
                      d.codes.state.codeword(fsm.states[e.to]), std::move(label)});
    which.push_back(c);
  }
  d.plans = solve_modifiers(d.layout, inputs, mds);
  for (std::size_t i = 0; i < d.plans.size(); ++i) {
    d.plans[i].configuration = which[i];
    d.plans[i].edge = *d.configurations[which[i]].edge;
    if (!verify_plan(d.layout, d.plans[i], mds)) throw Error("internal: modifier check failed for " + inputs[i].label);
  }
  d.netlist = build_hardened_netlist(fsm, d.edges, d.configurations, d.plans, config, d.codes, d.layout, mds);
  return d;
}

nlohmann::ordered_json gate_counts(const Netlist& netlist) {
  std::map<std::string, std::size_t> by_tag;
  for (const auto& g : netlist.gates()) ++by_tag[std::string(to_string(g.tag))];
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (auto tag : {StageTag::kMatch, StageTag::kModSelect, StageTag::kMix, StageTag::kDiffusion, StageTag::kUnmix,
                   StageTag::kInfect, StageTag::kErrorLogic, StageTag::kOutput, StageTag::kNone}) {
    const std::string name(to_string(tag));
    if (by_tag.count(name)) j[name.empty() ? "untagged" : name] = by_tag[name];
  }
  j["total"] = netlist.gates().size();
  j["flops"] = netlist.flops().size();
  return j;
}

nlohmann::ordered_json HardenedDesign::report() const {
  const MdsSpec& mds = find_mds(config.mds);
  nlohmann::ordered_json r;
  r["fsm"] = fsm.name;
  r["protection_level"] = config.protection_level;
  r["error_bits_per_block"] = layout.error_bits;
  r["block_count"] = layout.block_count;
  r["seed"] = config.seed;
  r["encoded_mux_selectors"] = config.encoded_mux_selectors;
  r["widths"] = {{"state", codes.state.width()},
                 {"control", codes.control_width()},
                 {"modifier", layout.modifier_width()},
                 {"error_total", layout.error_bits * layout.block_count}};
  nlohmann::ordered_json entries = nlohmann::ordered_json::array();
  for (const auto& row : mds.entries()) {
    nlohmann::ordered_json jr = nlohmann::ordered_json::array();
    for (auto e : row) jr.push_back(e.value);
    entries.push_back(jr);
  }
  r["mds"] = {{"name", mds.name()},
              {"entries", entries},
              {"xor_gates_per_block", mds.circuit().nodes.size()},
              {"depth", mds.circuit().depth()},
              {"branch_number", branch_number(mds)},
              {"is_mds", is_mds(mds)},
              {"note", "coefficient layout recalled from the published M(8,3;4,6) family and accepted because the "
                       "checks above hold; it is a stand-in if the original layout differs"}};
  nlohmann::ordered_json layout_j;
  auto slots = [](const std::vector<BitSlot>& v) {
    nlohmann::ordered_json a = nlohmann::ordered_json::array();
    for (auto s : v) a.push_back({s.block, s.position});
    return a;
  };
  layout_j["state_in"] = slots(layout.state_in);
  layout_j["control_in"] = slots(layout.control_in);
  layout_j["state_out"] = slots(layout.state_out);
  layout_j["modifier_lanes"] = layout.modifier_lanes;
  r["layout"] = layout_j;
  nlohmann::ordered_json pj = nlohmann::ordered_json::array();
  for (const auto& p : plans) {
    const auto& e = edges[p.edge];
    const auto& cfg = configurations[p.configuration];
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    for (const auto& [idx, v] : cfg.values) values[fsm.inputs[idx].name] = v;
    nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
    for (auto v : pack_blocks(layout, p.state_code, p.control_code, p.modifier)) blocks.push_back(hex32(v));
    pj.push_back({{"from", fsm.states[e.from]},
                  {"to", fsm.states[e.to]},
                  {"guard", values},
                  {"implicit", e.implicit()},
                  {"state_code", p.state_code.to_hex()},
                  {"control_code", p.control_code.empty() ? "" : p.control_code.to_hex()},
                  {"next_code", p.next_code.to_hex()},
                  {"modifier", p.modifier.to_hex()},
                  {"packed_input", blocks}});
  }
  r["plans"] = pj;
  r["gate_counts"] = gate_counts(netlist);
  nlohmann::ordered_json warnings = fsm.warnings;
  r["warnings"] = warnings;
  const std::string basis = to_json(fsm).dump() + "|" + std::to_string(config.protection_level) + "|" +
                            std::to_string(layout.error_bits) + "|" + std::to_string(layout.block_count) + "|" +
                            std::to_string(config.seed) + "|" + (config.encoded_mux_selectors ? "1" : "0") + "|" +
                            mds.name();
  r["fingerprint"] = BitVector::from_uint(fingerprint(basis), 64).to_hex();
  return r;
}

// ---- stimulus -----------------------------------------------------------

InputFrame encode_inputs(const CodeBooks& codes, const Assignment& values) {
  for (const auto& [sig, v] : values) {
    if (std::find(codes.input_names.begin(), codes.input_names.end(), sig) == codes.input_names.end()) {
      throw Error("unknown input signal '" + sig + "'");
    }
  }
  InputFrame frame;
  for (std::size_t i = 0; i < codes.inputs.size(); ++i) {
    auto it = values.find(codes.input_names[i]);
    if (it == values.end()) throw Error("missing value for input '" + codes.input_names[i] + "'");
    const std::string sym = std::to_string(it->second);
    const auto& book = codes.inputs[i];
    bool known = false;
    for (const auto& e : book.entries()) known = known || e.first == sym;
    if (!known) throw Error("value " + sym + " does not fit input '" + codes.input_names[i] + "'");
    const auto& cw = book.codeword(sym);
    for (std::size_t b = 0; b < cw.size(); ++b) frame.push_back(cw.get(b));
  }
  return frame;
}

std::vector<InputFrame> encode_trace(const CodeBooks& codes, std::span<const Assignment> trace) {
  std::vector<InputFrame> frames;
  frames.reserve(trace.size());
  for (std::size_t i = 0; i < trace.size(); ++i) {
    try {
      frames.push_back(encode_inputs(codes, trace[i]));
    } catch (const Error& e) {
      throw Error("step " + std::to_string(i) + ": " + e.what());
    }
  }
  return frames;
}

}  // namespace hardfsm
