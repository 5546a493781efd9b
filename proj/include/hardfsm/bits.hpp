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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace hardfsm {

// Every user-facing failure in the library is reported through this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-width vector over GF(2). Bit 0 is the least significant bit.
class BitVector {
 public:
  BitVector() = default;
  explicit BitVector(std::size_t width);

  static BitVector from_uint(std::uint64_t value, std::size_t width);
  // Parses a hex string (optionally 0x-prefixed) into `width` bits.
  static BitVector from_hex(std::string_view hex, std::size_t width);

  std::size_t size() const { return width_; }
  bool empty() const { return width_ == 0; }

  bool get(std::size_t i) const { return (words_[i / 64] >> (i % 64)) & 1u; }
  void set(std::size_t i, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (i % 64);
    if (v) {
      words_[i / 64] |= mask;
    } else {
      words_[i / 64] &= ~mask;
    }
  }
  void flip(std::size_t i) { words_[i / 64] ^= std::uint64_t{1} << (i % 64); }

  std::size_t popcount() const;
  bool none() const;
  // Low 64 bits.
  std::uint64_t to_uint() const { return words_.empty() ? 0 : words_[0]; }

  // Most significant nibble first, zero padded to ceil(width/4) digits.
  std::string to_hex() const;
  // Most significant bit first.
  std::string to_binary() const;

  BitVector& operator^=(const BitVector& other);
  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }

  friend bool operator==(const BitVector&, const BitVector&) = default;
  friend std::strong_ordering operator<=>(const BitVector& a, const BitVector& b);

  const std::vector<std::uint64_t>& words() const { return words_; }

 private:
  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

std::size_t hamming_distance(const BitVector& a, const BitVector& b);

// splitmix64 step; used to derive independent sub-seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// FNV-1a over a byte string; used for artifact fingerprints.
std::uint64_t fingerprint(std::string_view data);

}  // namespace hardfsm
