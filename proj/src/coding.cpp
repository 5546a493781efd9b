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

#include "hardfsm/coding.hpp"

#include <algorithm>
#include <bit>
#include <numeric>
#include <random>

namespace hardfsm {

namespace {

// Widths up to this bound are searched over the whole word space; beyond it a
// seeded sample of candidates is used.
constexpr std::size_t kExhaustiveWidth = 20;
constexpr std::size_t kSampleBudget = std::size_t{1} << 20;
constexpr int kShufflesPerWidth = 8;

std::vector<std::uint64_t> greedy(const std::vector<std::uint64_t>& candidates, std::size_t count, unsigned n) {
  std::vector<std::uint64_t> accepted{0};
  for (auto w : candidates) {
    if (accepted.size() >= count) break;
    const bool far = std::all_of(accepted.begin(), accepted.end(), [&](std::uint64_t a) {
      return static_cast<unsigned>(std::popcount(a ^ w)) >= n;
    });
    if (far) accepted.push_back(w);
  }
  return accepted;
}

std::vector<std::uint64_t> search(std::size_t count, unsigned n, std::uint64_t seed) {
  if (count == 1) return {0};
  std::size_t width = 1;
  while ((std::size_t{1} << width) < count) ++width;
  width = std::max<std::size_t>(width, n);
  for (;; ++width) {
    if (width > 63) throw Error("code search exceeded 63 bits");
    std::vector<std::uint64_t> candidates;
    if (width <= kExhaustiveWidth) {
      candidates.resize((std::size_t{1} << width) - 1);
      std::iota(candidates.begin(), candidates.end(), std::uint64_t{1});
    }
    for (int attempt = 0; attempt <= kShufflesPerWidth; ++attempt) {
      std::mt19937_64 rng(mix_seed(seed, width * 64 + static_cast<std::uint64_t>(attempt)));
      std::vector<std::uint64_t> order;
      if (width <= kExhaustiveWidth) {
        order = candidates;
        // The last attempt keeps lexicographic order (the classic lexicode).
        if (attempt < kShufflesPerWidth) std::shuffle(order.begin(), order.end(), rng);
      } else {
        order.reserve(kSampleBudget);
        const std::uint64_t mask = (std::uint64_t{1} << width) - 1;
        for (std::size_t i = 0; i < kSampleBudget; ++i) {
          const std::uint64_t w = rng() & mask;
          if (w != 0) order.push_back(w);
        }
      }
      auto words = greedy(order, count, n);
      if (words.size() >= count) {
        words.resize(count);
        return words;
      }
    }
  }
}

std::size_t code_width(const std::vector<std::uint64_t>& words, std::size_t count) {
  std::uint64_t all = 0;
  for (auto w : words) all |= w;
  std::size_t width = 1;
  while ((std::size_t{1} << width) < count) ++width;
  while (width < 64 && (all >> width) != 0) ++width;
  return width;
}

}  // namespace

CodeBook::CodeBook(unsigned protection_level, std::size_t width, std::vector<std::pair<std::string, BitVector>> entries,
                   std::string error_symbol)
    : protection_level_(protection_level),
      width_(width),
      entries_(std::move(entries)),
      error_symbol_(std::move(error_symbol)) {
  for (const auto& [sym, word] : entries_) {
    if (word.size() != width_) throw Error("codeword for '" + sym + "' has wrong width");
  }
  if (!codeword(error_symbol_).none()) throw Error("error symbol '" + error_symbol_ + "' must map to the zero word");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    for (std::size_t j = i + 1; j < entries_.size(); ++j) {
      if (entries_[i].first == entries_[j].first) throw Error("duplicate symbol '" + entries_[i].first + "'");
      if (hamming_distance(entries_[i].second, entries_[j].second) < protection_level_) {
        throw Error("codewords '" + entries_[i].first + "' and '" + entries_[j].first + "' are closer than " +
                    std::to_string(protection_level_));
      }
    }
  }
}

const BitVector& CodeBook::codeword(std::string_view symbol) const {
  for (const auto& [sym, word] : entries_) {
    if (sym == symbol) return word;
  }
  throw Error("symbol '" + std::string(symbol) + "' not in codebook");
}

std::optional<std::size_t> CodeBook::find(const BitVector& word) const {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].second == word) return i;
  }
  return std::nullopt;
}

nlohmann::ordered_json CodeBook::to_json() const {
  nlohmann::ordered_json entries = nlohmann::ordered_json::object();
  for (const auto& [sym, word] : entries_) entries[sym] = word.to_hex();
  return {{"width", width_}, {"protection_level", protection_level_}, {"entries", entries}, {"error", error_symbol_}};
}

CodeBook CodeBook::from_json(const nlohmann::ordered_json& j) {
  try {
    const auto width = j.at("width").get<std::size_t>();
    std::vector<std::pair<std::string, BitVector>> entries;
    for (const auto& [sym, hex] : j.at("entries").items()) {
      entries.emplace_back(sym, BitVector::from_hex(hex.get<std::string>(), width));
    }
    return CodeBook(j.at("protection_level").get<unsigned>(), width, std::move(entries),
                    j.at("error").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("malformed codebook: ") + e.what());
  }
}

CodeBook generate_code(std::size_t count, unsigned protection_level, std::uint64_t seed) {
  std::vector<std::string> symbols;
  for (std::size_t i = 0; i < count; ++i) symbols.push_back(std::to_string(i));
  if (symbols.empty()) throw Error("generate_code needs at least one symbol");
  return build_codebook(symbols, symbols.front(), protection_level, seed);
}

CodeBook build_codebook(const std::vector<std::string>& symbols, const std::string& error_symbol,
                        unsigned protection_level, std::uint64_t seed) {
  if (symbols.empty()) throw Error("codebook needs at least one symbol");
  if (protection_level < 1) throw Error("protection level must be >= 1");
  const auto words = search(symbols.size(), protection_level, seed);
  const std::size_t width = code_width(words, symbols.size());
  std::vector<std::pair<std::string, BitVector>> entries;
  // words[0] is the zero word; it goes to the error symbol.
  std::size_t next = 1;
  for (const auto& sym : symbols) {
    const std::uint64_t w = sym == error_symbol ? 0 : words.at(next++);
    entries.emplace_back(sym, BitVector::from_uint(w, width));
  }
  return CodeBook(protection_level, width, std::move(entries), error_symbol);
}

std::size_t min_distance(const CodeBook& code) {
  const auto& e = code.entries();
  if (e.size() < 2) throw Error("min_distance needs at least two codewords");
  std::size_t best = code.width() + 1;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) best = std::min(best, hamming_distance(e[i].second, e[j].second));
  }
  return best;
}

std::pair<std::string, std::size_t> nearest_codeword(const CodeBook& code, const BitVector& word) {
  if (word.size() != code.width()) {
    throw Error("word width " + std::to_string(word.size()) + " does not match codebook width " +
                std::to_string(code.width()));
  }
  std::size_t best = 0;
  std::size_t best_d = code.width() + 1;
  for (std::size_t i = 0; i < code.entries().size(); ++i) {
    const std::size_t d = hamming_distance(code.entries()[i].second, word);
    if (d < best_d) {
      best = i;
      best_d = d;
    }
  }
  return {code.entries()[best].first, best_d};
}

}  // namespace hardfsm
