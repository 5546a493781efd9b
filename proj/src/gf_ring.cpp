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

#include "hardfsm/gf_ring.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <mutex>
#include <random>

namespace hardfsm {

RingElem ring_mul(RingElem a, RingElem b) {
  std::uint16_t product = 0;
  for (unsigned i = 0; i < 8; ++i) {
    if ((b.value >> i) & 1u) product ^= static_cast<std::uint16_t>(a.value << i);
  }
  for (unsigned i = 15; i >= 8; --i) {
    if ((product >> i) & 1u) product ^= static_cast<std::uint16_t>(kRingModulus << (i - 8));
  }
  return RingElem{static_cast<std::uint8_t>(product)};
}

RingElem ring_mul_alpha(RingElem x) {
  const std::uint8_t top = x.value >> 7;
  return RingElem{static_cast<std::uint8_t>((x.value << 1) ^ (top ? 0x05 : 0x00))};
}

// --- BitMatrix -------------------------------------------------------------

BitMatrix::BitMatrix(std::size_t rows, std::size_t cols) : cols_(cols), rows_(rows, BitVector(cols)) {}

BitMatrix BitMatrix::identity(std::size_t n) {
  BitMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
  return m;
}

BitVector BitMatrix::multiply(const BitVector& x) const {
  if (x.size() != cols_) throw Error("matrix-vector width mismatch");
  BitVector y(rows_.size());
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    std::size_t parity = 0;
    for (std::size_t w = 0; w < x.words().size(); ++w) {
      parity += static_cast<std::size_t>(std::popcount(rows_[r].words()[w] & x.words()[w]));
    }
    y.set(r, parity & 1u);
  }
  return y;
}

std::size_t BitMatrix::rank() const {
  std::vector<BitVector> m = rows_;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols_ && rank < m.size(); ++c) {
    std::size_t pivot = rank;
    while (pivot < m.size() && !m[pivot].get(c)) ++pivot;
    if (pivot == m.size()) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r != rank && m[r].get(c)) m[r] ^= m[rank];
    }
    ++rank;
  }
  return rank;
}

std::optional<BitVector> solve_gf2(const BitMatrix& a, const BitVector& b) {
  if (b.size() != a.rows()) throw Error("solve_gf2: right-hand side has wrong width");
  const std::size_t rows = a.rows();
  const std::size_t cols = a.cols();
  // Augmented rows: bit `cols` holds the right-hand side.
  std::vector<BitVector> m;
  m.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    BitVector row(cols + 1);
    for (std::size_t c = 0; c < cols; ++c) row.set(c, a.get(r, c));
    row.set(cols, b.get(r));
    m.push_back(std::move(row));
  }
  std::vector<std::size_t> pivot_cols;
  std::size_t rank = 0;
  for (std::size_t c = 0; c < cols && rank < rows; ++c) {
    std::size_t pivot = rank;
    while (pivot < rows && !m[pivot].get(c)) ++pivot;
    if (pivot == rows) continue;
    std::swap(m[rank], m[pivot]);
    for (std::size_t r = 0; r < rows; ++r) {
      if (r != rank && m[r].get(c)) m[r] ^= m[rank];
    }
    pivot_cols.push_back(c);
    ++rank;
  }
  for (std::size_t r = rank; r < rows; ++r) {
    if (m[r].get(cols)) return std::nullopt;
  }
  BitVector x(cols);
  for (std::size_t r = 0; r < rank; ++r) x.set(pivot_cols[r], m[r].get(cols));
  return x;
}

// --- circuits --------------------------------------------------------------

std::uint32_t XorCircuit::evaluate(std::uint32_t input) const {
  std::vector<std::uint8_t> values(32 + nodes.size());
  for (unsigned i = 0; i < 32; ++i) values[i] = (input >> i) & 1u;
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    values[32 + n] = values[nodes[n].lhs] ^ values[nodes[n].rhs];
  }
  std::uint32_t out = 0;
  for (unsigned i = 0; i < 32; ++i) out |= static_cast<std::uint32_t>(values[outputs[i]]) << i;
  return out;
}

unsigned XorCircuit::depth() const {
  unsigned d = 0;
  for (const auto& n : nodes) d = std::max(d, n.layer);
  return d;
}

std::array<RingElem, 4> run_word_program(const WordProgram& program, std::array<RingElem, 4> in) {
  std::vector<RingElem> words(in.begin(), in.end());
  for (const auto& op : program.ops) {
    if (op.kind == WordOp::Kind::kXor) {
      words.push_back(words.at(op.lhs) + words.at(op.rhs));
    } else {
      words.push_back(ring_mul_alpha(words.at(op.lhs)));
    }
  }
  std::array<RingElem, 4> out;
  for (unsigned i = 0; i < 4; ++i) out[i] = words.at(program.outputs[i]);
  return out;
}

XorCircuit expand_program(const WordProgram& program) {
  XorCircuit circuit;
  std::vector<std::array<std::uint32_t, 8>> words;
  std::vector<unsigned> layer(32, 0);
  for (unsigned j = 0; j < 4; ++j) {
    std::array<std::uint32_t, 8> w;
    for (unsigned b = 0; b < 8; ++b) w[b] = 8 * j + b;
    words.push_back(w);
  }
  auto add_node = [&](std::uint32_t lhs, std::uint32_t rhs, unsigned word) {
    const unsigned l = std::max(layer[lhs], layer[rhs]) + 1;
    circuit.nodes.push_back({lhs, rhs, l, word});
    layer.push_back(l);
    return static_cast<std::uint32_t>(32 + circuit.nodes.size() - 1);
  };
  for (unsigned idx = 0; idx < program.ops.size(); ++idx) {
    const auto& op = program.ops[idx];
    if (op.lhs >= words.size() || (op.kind == WordOp::Kind::kXor && op.rhs >= words.size())) {
      throw Error("word program references an undefined word");
    }
    std::array<std::uint32_t, 8> w;
    if (op.kind == WordOp::Kind::kXor) {
      for (unsigned b = 0; b < 8; ++b) w[b] = add_node(words[op.lhs][b], words[op.rhs][b], idx);
    } else {
      const auto& x = words[op.lhs];
      w[0] = x[7];
      w[1] = x[0];
      w[2] = add_node(x[1], x[7], idx);
      for (unsigned b = 3; b < 8; ++b) w[b] = x[b - 1];
    }
    words.push_back(w);
  }
  for (unsigned i = 0; i < 4; ++i) {
    for (unsigned b = 0; b < 8; ++b) circuit.outputs[8 * i + b] = words.at(program.outputs[i])[b];
  }
  return circuit;
}

WordProgram straightforward_program(const std::array<std::array<RingElem, 4>, 4>& entries) {
  WordProgram program;
  unsigned next = 4;
  // powers[j][k] = word id of a^k * x_j
  std::array<std::vector<unsigned>, 4> powers;
  for (unsigned j = 0; j < 4; ++j) {
    unsigned degree = 0;
    for (unsigned i = 0; i < 4; ++i) {
      if (entries[i][j].value) degree = std::max(degree, 7u - static_cast<unsigned>(std::countl_zero(entries[i][j].value)));
    }
    powers[j].push_back(j);
    for (unsigned k = 1; k <= degree; ++k) {
      program.ops.push_back({WordOp::Kind::kMulAlpha, powers[j].back()});
      powers[j].push_back(next++);
    }
  }
  for (unsigned i = 0; i < 4; ++i) {
    std::vector<unsigned> terms;
    for (unsigned j = 0; j < 4; ++j) {
      for (unsigned k = 0; k < 8; ++k) {
        if ((entries[i][j].value >> k) & 1u) terms.push_back(powers[j][k]);
      }
    }
    if (terms.empty()) throw Error("matrix row " + std::to_string(i) + " is zero");
    unsigned acc = terms[0];
    for (std::size_t t = 1; t < terms.size(); ++t) {
      program.ops.push_back({WordOp::Kind::kXor, acc, terms[t]});
      acc = next++;
    }
    program.outputs[i] = acc;
  }
  return program;
}

// --- MdsSpec ---------------------------------------------------------------

MdsSpec::MdsSpec(std::string name, std::array<std::array<RingElem, 4>, 4> entries,
                 std::optional<WordProgram> program)
    : name_(std::move(name)), entries_(entries), binary_(32, 32) {
  for (unsigned col = 0; col < 32; ++col) {
    const std::uint32_t image = apply(std::uint32_t{1} << col);
    for (unsigned row = 0; row < 32; ++row) binary_.set(row, col, (image >> row) & 1u);
  }
  program_ = program ? *program : straightforward_program(entries_);
  for (unsigned j = 0; j < 4; ++j) {
    for (unsigned b = 0; b < 8; ++b) {
      std::array<RingElem, 4> in{};
      in[j] = RingElem{static_cast<std::uint8_t>(1u << b)};
      const auto out = run_word_program(program_, in);
      for (unsigned i = 0; i < 4; ++i) {
        if (out[i] != ring_mul(entries_[i][j], in[j])) {
          throw Error("word program for matrix '" + name_ + "' does not realize its entries");
        }
      }
    }
  }
  circuit_ = expand_program(program_);
}

std::uint32_t MdsSpec::apply(std::uint32_t v) const {
  std::uint32_t out = 0;
  for (unsigned i = 0; i < 4; ++i) {
    RingElem acc{};
    for (unsigned j = 0; j < 4; ++j) {
      acc = acc + ring_mul(entries_[i][j], RingElem{static_cast<std::uint8_t>(v >> (8 * j))});
    }
    out |= static_cast<std::uint32_t>(acc.value) << (8 * i);
  }
  return out;
}

std::uint32_t MdsSpec::apply_binary(std::uint32_t v) const {
  const BitVector y = binary_.multiply(BitVector::from_uint(v, 32));
  return static_cast<std::uint32_t>(y.to_uint());
}

std::uint32_t mds_apply(const MdsSpec& m, std::uint32_t v) { return m.apply(v); }

namespace {

WordProgram factored_8_3_program() {
  using K = WordOp::Kind;
  WordProgram p;
  // a=0 b=1 c=2 d=3
  p.ops = {
      {K::kXor, 0, 1},       // 4: a+b
      {K::kXor, 2, 3},       // 5: c+d
      {K::kXor, 4, 2},       // 6: a+b+c
      {K::kMulAlpha, 6},     // 7
      {K::kXor, 7, 5},       // 8: y0
      {K::kXor, 4, 3},       // 9: a+b+d
      {K::kMulAlpha, 9},     // 10
      {K::kXor, 0, 5},       // 11: a+c+d
      {K::kXor, 10, 11},     // 12: y3
      {K::kMulAlpha, 5},     // 13
      {K::kMulAlpha, 13},    // 14: a^2(c+d)
      {K::kXor, 4, 14},      // 15: shared by y1, y2
      {K::kMulAlpha, 0},     // 16
      {K::kXor, 16, 15},     // 17: y2
      {K::kXor, 1, 2},       // 18: b+c
      {K::kMulAlpha, 18},    // 19
      {K::kXor, 19, 15},     // 20: y1
  };
  p.outputs = {8, 20, 17, 12};
  return p;
}

std::array<std::array<RingElem, 4>, 4> entries_from(const std::array<std::array<std::uint8_t, 4>, 4>& raw) {
  std::array<std::array<RingElem, 4>, 4> e;
  for (unsigned i = 0; i < 4; ++i) {
    for (unsigned j = 0; j < 4; ++j) e[i][j] = RingElem{raw[i][j]};
  }
  return e;
}

unsigned active_bytes(std::uint32_t v) {
  unsigned n = 0;
  for (unsigned i = 0; i < 4; ++i) n += ((v >> (8 * i)) & 0xffu) != 0;
  return n;
}

struct Registry {
  std::mutex mu;
  std::map<std::string, MdsSpec> specs;
};

Registry& registry() {
  static Registry r;
  return r;
}

}  // namespace

const MdsSpec& default_mds() {
  // Entries are polynomials in a: 2 = a, 3 = a+1, 4 = a^2, 6 = a^2+a.
  static const MdsSpec m("M8_3_4_6",
                         entries_from({{{2, 2, 3, 1}, {1, 3, 6, 4}, {3, 1, 4, 4}, {3, 2, 1, 3}}}),
                         factored_8_3_program());
  return m;
}

unsigned branch_number(const MdsSpec& m, std::size_t samples, std::uint64_t seed) {
  std::array<std::array<std::uint32_t, 256>, 4> table;
  for (unsigned j = 0; j < 4; ++j) {
    for (unsigned x = 0; x < 256; ++x) table[j][x] = m.apply(x << (8 * j));
  }
  unsigned best = 8;
  for (unsigned j = 0; j < 4; ++j) {
    for (unsigned x = 1; x < 256; ++x) best = std::min(best, 1 + active_bytes(table[j][x]));
  }
  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const std::uint64_t r = rng();
    unsigned mask = static_cast<unsigned>(r & 0xfu);
    if (std::popcount(mask) < 2) mask |= 0x3u << (static_cast<unsigned>(r >> 4) % 3);
    std::uint32_t v = 0;
    std::uint32_t out = 0;
    for (unsigned j = 0; j < 4; ++j) {
      if (!((mask >> j) & 1u)) continue;
      const unsigned byte = 1 + static_cast<unsigned>((r >> (8 + 8 * j)) % 255);
      v |= byte << (8 * j);
      out ^= table[j][byte];
    }
    best = std::min(best, active_bytes(v) + active_bytes(out));
  }
  return best;
}

bool is_mds(const MdsSpec& m) {
  const BitMatrix& bin = m.binary_form();
  for (unsigned rows = 1; rows < 16; ++rows) {
    for (unsigned cols = 1; cols < 16; ++cols) {
      const unsigned size = static_cast<unsigned>(std::popcount(rows));
      if (static_cast<unsigned>(std::popcount(cols)) != size) continue;
      BitMatrix sub(8 * size, 8 * size);
      unsigned sr = 0;
      for (unsigned i = 0; i < 4; ++i) {
        if (!((rows >> i) & 1u)) continue;
        for (unsigned rb = 0; rb < 8; ++rb, ++sr) {
          unsigned sc = 0;
          for (unsigned j = 0; j < 4; ++j) {
            if (!((cols >> j) & 1u)) continue;
            for (unsigned cb = 0; cb < 8; ++cb, ++sc) sub.set(sr, sc, bin.get(8 * i + rb, 8 * j + cb));
          }
        }
      }
      if (sub.rank() != 8 * size) return false;
    }
  }
  return true;
}

void register_mds(const MdsSpec& m) {
  const unsigned bn = branch_number(m, 100000);
  if (bn < 5) {
    throw Error("matrix '" + m.name() + "' has branch number " + std::to_string(bn) + " < 5");
  }
  auto& r = registry();
  std::lock_guard lock(r.mu);
  r.specs.insert_or_assign(m.name(), m);
}

const MdsSpec& find_mds(const std::string& name) {
  if (name == default_mds().name()) return default_mds();
  auto& r = registry();
  std::lock_guard lock(r.mu);
  auto it = r.specs.find(name);
  if (it == r.specs.end()) throw Error("unknown diffusion matrix '" + name + "'");
  return it->second;
}

std::vector<std::string> registered_mds() {
  std::vector<std::string> names{default_mds().name()};
  auto& r = registry();
  std::lock_guard lock(r.mu);
  for (const auto& [name, spec] : r.specs) {
    if (name != names.front()) names.push_back(name);
  }
  return names;
}

}  // namespace hardfsm
