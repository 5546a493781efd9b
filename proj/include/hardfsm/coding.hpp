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
#include <string>
#include <utility>
#include <vector>

#include "hardfsm/bits.hpp"
#include "json.hpp"

namespace hardfsm {

// Codewords for a set of symbols with pairwise Hamming distance >= N. The
// error symbol always carries the all-zeros word.
class CodeBook {
 public:
  CodeBook() = default;
  CodeBook(unsigned protection_level, std::size_t width, std::vector<std::pair<std::string, BitVector>> entries,
           std::string error_symbol);

  unsigned protection_level() const { return protection_level_; }
  std::size_t width() const { return width_; }
  const std::vector<std::pair<std::string, BitVector>>& entries() const { return entries_; }
  const std::string& error_symbol() const { return error_symbol_; }
  const BitVector& error_codeword() const { return codeword(error_symbol_); }

  const BitVector& codeword(std::string_view symbol) const;
  // Entry index of an exact codeword match.
  std::optional<std::size_t> find(const BitVector& word) const;

  nlohmann::ordered_json to_json() const;
  static CodeBook from_json(const nlohmann::ordered_json& j);

 private:
  unsigned protection_level_ = 1;
  std::size_t width_ = 0;
  std::vector<std::pair<std::string, BitVector>> entries_;
  std::string error_symbol_;
};

// Randomized greedy lexicode: candidate words of the current width are
// visited in a seed-dependent order and accepted when at distance >= N from
// every accepted word, starting from all-zeros. The width grows until `count`
// words fit. Symbols are "0".."count-1"; symbol "0" is the zero word and the
// designated error entry.
CodeBook generate_code(std::size_t count, unsigned protection_level, std::uint64_t seed);

// Same construction with caller-chosen symbols; `error_symbol` gets the zero word.
CodeBook build_codebook(const std::vector<std::string>& symbols, const std::string& error_symbol,
                        unsigned protection_level, std::uint64_t seed);

// Exact minimum pairwise distance. Throws with fewer than two entries.
std::size_t min_distance(const CodeBook& code);

// Closest entry; ties resolve to the earlier entry.
std::pair<std::string, std::size_t> nearest_codeword(const CodeBook& code, const BitVector& word);

}  // namespace hardfsm
