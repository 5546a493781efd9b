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

#include <random>

#include "doctest.h"
#include "hardfsm/gf_ring.hpp"

using namespace hardfsm;

namespace {

// Carry-less product, then long division by the modulus.
unsigned schoolbook(unsigned a, unsigned b) {
  unsigned prod = 0;
  for (unsigned i = 0; i < 8; ++i) {
    if ((b >> i) & 1u) prod ^= a << i;
  }
  for (int deg = 14; deg >= 8; --deg) {
    if ((prod >> deg) & 1u) prod ^= 0x105u << (deg - 8);
  }
  return prod;
}

// Byte-wise reference for the matrix product.
std::uint32_t matrix_oracle(const std::array<std::array<RingElem, 4>, 4>& m, std::uint32_t v) {
  std::uint32_t out = 0;
  for (unsigned r = 0; r < 4; ++r) {
    unsigned acc = 0;
    for (unsigned c = 0; c < 4; ++c) acc ^= schoolbook(m[r][c].value, (v >> (8 * c)) & 0xffu);
    out |= acc << (8 * r);
  }
  return out;
}

std::size_t popcount_naive(const BitVector& v) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < v.size(); ++i) n += v.get(i);
  return n;
}

}  // namespace

TEST_CASE("bit vector hex and binary round trip") {
  const auto v = BitVector::from_hex("0x1f3", 10);
  CHECK(v.size() == 10);
  CHECK(v.to_uint() == 0x1f3);
  CHECK(v.to_hex() == "1f3");
  CHECK(v.to_binary() == "0111110011");
  CHECK(BitVector::from_hex(v.to_hex(), 10) == v);
  CHECK_THROWS_AS(BitVector::from_hex("zz", 8), Error);
  CHECK_THROWS_AS(BitVector::from_hex("1ff", 8), Error);

  BitVector wide(130);
  wide.set(0, true);
  wide.set(129, true);
  CHECK(wide.popcount() == 2);
  CHECK(BitVector::from_hex(wide.to_hex(), 130) == wide);
}

TEST_CASE("hamming distance matches a bit-by-bit count") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 500; ++t) {
    const std::size_t w = 1 + rng() % 100;
    BitVector a(w);
    BitVector b(w);
    for (std::size_t i = 0; i < w; ++i) {
      a.set(i, rng() & 1);
      b.set(i, rng() & 1);
    }
    CHECK(hamming_distance(a, b) == popcount_naive(a ^ b));
    CHECK(a.popcount() == popcount_naive(a));
  }
}

TEST_CASE("seed mixing and fingerprints are fixed functions") {
  CHECK(mix_seed(1, 0) == mix_seed(1, 0));
  CHECK(mix_seed(1, 0) != mix_seed(1, 1));
  CHECK(fingerprint("") == 0xcbf29ce484222325ULL);
  CHECK(fingerprint("a") == 0xaf63dc4c8601ec8cULL);
}

TEST_CASE("ring multiplication agrees with schoolbook reduction") {
  for (unsigned a = 0; a < 256; ++a) {
    for (unsigned b = 0; b < 256; ++b) {
      REQUIRE(ring_mul(RingElem{static_cast<std::uint8_t>(a)}, RingElem{static_cast<std::uint8_t>(b)}).value ==
              schoolbook(a, b));
    }
    CHECK(ring_mul_alpha(RingElem{static_cast<std::uint8_t>(a)}).value == schoolbook(a, 2));
  }
}

TEST_CASE("the ring has zero divisors") {
  // a^4 + a + 1 squared is the modulus itself.
  CHECK(ring_mul(RingElem{0x13}, RingElem{0x13}).value == 0);
}

TEST_CASE("gf2 solver returns verified solutions or reports inconsistency") {
  std::mt19937_64 rng(11);
  int solved = 0;
  int inconsistent = 0;
  for (int t = 0; t < 300; ++t) {
    const std::size_t rows = 1 + rng() % 24;
    const std::size_t cols = 1 + rng() % 24;
    BitMatrix a(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) a.set(r, c, rng() & 1);
    }
    BitVector b(rows);
    for (std::size_t r = 0; r < rows; ++r) b.set(r, rng() & 1);
    const auto x = solve_gf2(a, b);
    if (x) {
      CHECK(a.multiply(*x) == b);
      ++solved;
    } else {
      // Inconsistent iff appending b raises the rank.
      BitMatrix aug(rows, cols + 1);
      for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) aug.set(r, c, a.get(r, c));
        aug.set(r, cols, b.get(r));
      }
      CHECK(aug.rank() == a.rank() + 1);
      ++inconsistent;
    }
  }
  CHECK(solved > 0);
  CHECK(inconsistent > 0);
  CHECK(BitMatrix::identity(7).rank() == 7);
}

TEST_CASE("default diffusion matrix: entries, binary form and circuit agree") {
  const MdsSpec& m = default_mds();
  const std::array<std::array<unsigned, 4>, 4> expected{{{2, 2, 3, 1}, {1, 3, 6, 4}, {3, 1, 4, 4}, {3, 2, 1, 3}}};
  for (unsigned r = 0; r < 4; ++r) {
    for (unsigned c = 0; c < 4; ++c) CHECK(m.entries()[r][c].value == expected[r][c]);
  }
  std::mt19937_64 rng(3);
  for (int t = 0; t < 100000; ++t) {
    const auto v = static_cast<std::uint32_t>(rng());
    const auto want = matrix_oracle(m.entries(), v);
    REQUIRE(m.apply(v) == want);
    REQUIRE(m.apply_binary(v) == want);
    REQUIRE(m.apply_circuit(v) == want);
    REQUIRE(mds_apply(m, v) == want);
  }
  for (unsigned j = 0; j < 32; ++j) {
    for (unsigned i = 0; i < 32; ++i) {
      CHECK(m.binary_form().get(i, j) == (((matrix_oracle(m.entries(), 1u << j)) >> i) & 1u));
    }
  }
}

TEST_CASE("factored circuit is XOR-only, shallow and cheaper than the direct expansion") {
  const MdsSpec& m = default_mds();
  const auto direct = expand_program(straightforward_program(m.entries()));
  CHECK(m.circuit().nodes.size() < direct.nodes.size());
  CHECK(m.circuit().depth() <= 4);
  for (std::uint32_t v : {0u, 1u, 0x80000000u, 0xdeadbeefu}) CHECK(direct.evaluate(v) == m.apply(v));
  const auto words = run_word_program(m.program(), {RingElem{1}, RingElem{2}, RingElem{3}, RingElem{4}});
  const auto packed = static_cast<std::uint32_t>(words[0].value) | (words[1].value << 8) | (words[2].value << 16) |
                      (static_cast<std::uint32_t>(words[3].value) << 24);
  CHECK(packed == m.apply(0x04030201u));
}

TEST_CASE("branch number and MDS property") {
  const MdsSpec& m = default_mds();
  CHECK(branch_number(m) == 5);
  CHECK(branch_number(m, 20000, 9) == 5);
  CHECK(is_mds(m));

  const RingElem one{1};
  const MdsSpec weak("all_ones", {{{one, one, one, one}, {one, one, one, one}, {one, one, one, one},
                                   {one, one, one, one}}});
  CHECK(branch_number(weak) == 5);  // single active bytes alone do not expose it
  CHECK(branch_number(weak, 20000, 9) < 5);
  CHECK_FALSE(is_mds(weak));
  CHECK_THROWS_AS(register_mds(weak), Error);
  CHECK_THROWS_AS(find_mds("no_such_matrix"), Error);
  CHECK(find_mds("M8_3_4_6").name() == "M8_3_4_6");
}

TEST_CASE("a word program that disagrees with its matrix is rejected") {
  WordProgram p = straightforward_program(default_mds().entries());
  std::swap(p.outputs[0], p.outputs[1]);
  CHECK_THROWS_AS(MdsSpec("bad", default_mds().entries(), p), Error);
}
