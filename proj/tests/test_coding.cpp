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

#include "doctest.h"
#include "hardfsm/coding.hpp"

using namespace hardfsm;

namespace {

std::size_t brute_min_distance(const CodeBook& c) {
  std::size_t best = ~std::size_t{0};
  const auto& e = c.entries();
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      std::size_t d = 0;
      for (std::size_t b = 0; b < c.width(); ++b) d += e[i].second.get(b) != e[j].second.get(b);
      best = std::min(best, d);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("generated codes meet the requested distance") {
  for (unsigned n : {2u, 3u, 4u}) {
    for (std::size_t count : {4u, 8u, 14u, 32u}) {
      const auto code = generate_code(count, n, 1);
      CAPTURE(n);
      CAPTURE(count);
      REQUIRE(code.entries().size() == count);
      CHECK(brute_min_distance(code) >= n);
      CHECK(min_distance(code) == brute_min_distance(code));
      CHECK(code.error_symbol() == "0");
      CHECK(code.error_codeword().none());
    }
  }
}

TEST_CASE("code width is minimal for the even-weight case") {
  // 8 words at distance 2 need 4 bits; the even-weight code of length 4 has exactly 8.
  CHECK(generate_code(8, 2, 1).width() == 4);
  CHECK(generate_code(2, 3, 1).width() == 3);
}

TEST_CASE("codes are a function of the seed") {
  const auto a = generate_code(14, 3, 42);
  const auto b = generate_code(14, 3, 42);
  CHECK(a.to_json() == b.to_json());
  bool differs = false;
  for (std::uint64_t s = 43; s < 50 && !differs; ++s) differs = generate_code(14, 3, s).to_json() != a.to_json();
  CHECK(differs);
}

TEST_CASE("named codebook puts the error symbol on the zero word") {
  const auto c = build_codebook({"IDLE", "RUN", "ERROR", "DONE"}, "ERROR", 3, 9);
  CHECK(c.codeword("ERROR").none());
  CHECK(c.error_symbol() == "ERROR");
  CHECK(brute_min_distance(c) >= 3);
  CHECK(c.entries()[0].first == "IDLE");
  CHECK(c.find(c.codeword("RUN")) == std::optional<std::size_t>{1});
  BitVector off = c.codeword("RUN");
  off.flip(0);
  CHECK_FALSE(c.find(off).has_value());
  CHECK_THROWS_AS(c.codeword("MISSING"), Error);
}

TEST_CASE("nearest codeword") {
  const auto c = build_codebook({"A", "B", "E"}, "E", 2, 1);
  for (const auto& [sym, word] : c.entries()) {
    const auto [name, dist] = nearest_codeword(c, word);
    CHECK(name == sym);
    CHECK(dist == 0);
  }
  // A single flip from the zero word is equally close to nothing closer than distance 1.
  BitVector w(c.width());
  w.flip(0);
  CHECK(nearest_codeword(c, w).second == 1);
  CHECK_THROWS_AS(nearest_codeword(c, BitVector(c.width() + 1)), Error);
}

TEST_CASE("nearest codeword breaks ties toward the earlier entry") {
  std::vector<std::pair<std::string, BitVector>> entries{{"Z", BitVector::from_uint(0b00, 2)},
                                                         {"P", BitVector::from_uint(0b11, 2)}};
  const CodeBook c(2, 2, entries, "Z");
  CHECK(nearest_codeword(c, BitVector::from_uint(0b01, 2)).first == "Z");
  CHECK(nearest_codeword(c, BitVector::from_uint(0b10, 2)).first == "Z");
}

TEST_CASE("min distance needs two entries") {
  CHECK_THROWS_AS(min_distance(generate_code(1, 2, 1)), Error);
}

TEST_CASE("codebook JSON round trip keeps entry order") {
  const auto c = build_codebook({"S3", "S1", "S2", "ERROR"}, "ERROR", 2, 5);
  const auto again = CodeBook::from_json(nlohmann::ordered_json::parse(c.to_json().dump()));
  CHECK(again.to_json() == c.to_json());
  CHECK(again.entries().front().first == "S3");
  CHECK(again.width() == c.width());
  CHECK(again.protection_level() == 2);
}

TEST_CASE("constructor rejects malformed codebooks") {
  std::vector<std::pair<std::string, BitVector>> close{{"E", BitVector::from_uint(0, 3)},
                                                       {"A", BitVector::from_uint(1, 3)}};
  CHECK_THROWS_AS(CodeBook(2, 3, close, "E"), Error);
  std::vector<std::pair<std::string, BitVector>> nonzero_error{{"E", BitVector::from_uint(7, 3)},
                                                               {"A", BitVector::from_uint(0, 3)}};
  CHECK_THROWS_AS(CodeBook(2, 3, nonzero_error, "E"), Error);
}
