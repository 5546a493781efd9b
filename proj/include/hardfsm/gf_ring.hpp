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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hardfsm/bits.hpp"

namespace hardfsm {

// Element of F2[a]/(a^8 + a^2 + 1). Bit i is the coefficient of a^i.
//
// a^8 + a^2 + 1 = (a^4 + a + 1)^2, so this is a ring rather than a field.
// Nothing below relies on inverses; the diffusion property of a matrix is
// checked directly on its binary expansion.
struct RingElem {
  std::uint8_t value = 0;

  friend constexpr RingElem operator+(RingElem a, RingElem b) {
    return RingElem{static_cast<std::uint8_t>(a.value ^ b.value)};
  }
  friend constexpr bool operator==(RingElem, RingElem) = default;
};

inline constexpr std::uint16_t kRingModulus = 0x105;  // a^8 + a^2 + 1

RingElem ring_mul(RingElem a, RingElem b);
// Multiplication by a; the linear map a word-level circuit realizes with one XOR.
RingElem ring_mul_alpha(RingElem x);

// Dense matrix over GF(2), row major.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols);

  static BitMatrix identity(std::size_t n);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return cols_; }

  bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
  void set(std::size_t r, std::size_t c, bool v) { rows_[r].set(c, v); }
  const BitVector& row(std::size_t r) const { return rows_[r]; }

  BitVector multiply(const BitVector& x) const;
  std::size_t rank() const;

 private:
  std::size_t cols_ = 0;
  std::vector<BitVector> rows_;
};

// Gaussian elimination over GF(2). Returns one solution of A*x = b with all
// free variables set to zero, or nullopt when the system is inconsistent.
std::optional<BitVector> solve_gf2(const BitMatrix& a, const BitVector& b);

// Bit-level DAG of two-input XOR nodes. References below 32 name input bits;
// reference 32 + i names node i.
struct XorCircuit {
  struct Node {
    std::uint32_t lhs;
    std::uint32_t rhs;
    unsigned layer;  // 1-based XOR depth
    unsigned word;   // word-level operation that produced the node
  };
  std::vector<Node> nodes;
  std::array<std::uint32_t, 32> outputs{};

  std::uint32_t evaluate(std::uint32_t input) const;
  unsigned depth() const;
};

// Word-level recipe for a 4x4 matrix: words 0..3 are the input bytes, each
// operation appends a new word.
struct WordOp {
  enum class Kind { kXor, kMulAlpha };
  Kind kind;
  unsigned lhs;
  unsigned rhs = 0;  // unused for kMulAlpha
};

struct WordProgram {
  std::vector<WordOp> ops;
  std::array<unsigned, 4> outputs{};
};

// 4x4 diffusion matrix over the ring acting on a 32-bit vector packed as four
// bytes, byte j at bits [8j, 8j+8).
class MdsSpec {
 public:
  MdsSpec(std::string name, std::array<std::array<RingElem, 4>, 4> entries,
          std::optional<WordProgram> program = std::nullopt);

  const std::string& name() const { return name_; }
  const std::array<std::array<RingElem, 4>, 4>& entries() const { return entries_; }
  // 32x32 matrix; column j is the image of unit vector e_j.
  const BitMatrix& binary_form() const { return binary_; }
  const XorCircuit& circuit() const { return circuit_; }
  const WordProgram& program() const { return program_; }

  std::uint32_t apply(std::uint32_t v) const;
  std::uint32_t apply_binary(std::uint32_t v) const;
  std::uint32_t apply_circuit(std::uint32_t v) const { return circuit_.evaluate(v); }

 private:
  std::string name_;
  std::array<std::array<RingElem, 4>, 4> entries_;
  BitMatrix binary_;
  WordProgram program_;
  XorCircuit circuit_;
};

std::uint32_t mds_apply(const MdsSpec& m, std::uint32_t v);

// Generic word program: each output row is an XOR of a^k * x_j terms.
WordProgram straightforward_program(const std::array<std::array<RingElem, 4>, 4>& entries);
// Evaluates a word program on four input bytes.
std::array<RingElem, 4> run_word_program(const WordProgram& program, std::array<RingElem, 4> in);
XorCircuit expand_program(const WordProgram& program);

// The M{8,3;4,6} matrix with a factored low-depth word program.
const MdsSpec& default_mds();

// Minimum of active input bytes + active output bytes over nonzero inputs.
// All single-active-byte inputs are swept exhaustively, then `samples` random
// multi-byte inputs are tried.
unsigned branch_number(const MdsSpec& m, std::size_t samples = 0, std::uint64_t seed = 1);

// True when every square byte-submatrix has an invertible binary expansion.
bool is_mds(const MdsSpec& m);

// Registry of diffusion matrices selectable by name. Registration requires
// branch number >= 5.
void register_mds(const MdsSpec& m);
const MdsSpec& find_mds(const std::string& name);
std::vector<std::string> registered_mds();

}  // namespace hardfsm
