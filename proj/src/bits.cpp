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

#include "hardfsm/bits.hpp"

#include <bit>

namespace hardfsm {

BitVector::BitVector(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

BitVector BitVector::from_uint(std::uint64_t value, std::size_t width) {
  BitVector v(width);
  for (std::size_t i = 0; i < width && i < 64; ++i) {
    v.set(i, (value >> i) & 1u);
  }
  return v;
}

BitVector BitVector::from_hex(std::string_view hex, std::size_t width) {
  if (hex.starts_with("0x") || hex.starts_with("0X")) {
    hex.remove_prefix(2);
  }
  BitVector v(width);
  std::size_t bit = 0;
  for (auto it = hex.rbegin(); it != hex.rend(); ++it, bit += 4) {
    const char c = *it;
    unsigned nibble;
    if (c >= '0' && c <= '9') {
      nibble = static_cast<unsigned>(c - '0');
    } else if (c >= 'a' && c <= 'f') {
      nibble = static_cast<unsigned>(c - 'a' + 10);
    } else if (c >= 'A' && c <= 'F') {
      nibble = static_cast<unsigned>(c - 'A' + 10);
    } else {
      throw Error("invalid hex digit '" + std::string(1, c) + "'");
    }
    for (unsigned k = 0; k < 4; ++k) {
      if (!((nibble >> k) & 1u)) continue;
      if (bit + k >= width) {
        throw Error("hex value '" + std::string(hex) + "' exceeds width " + std::to_string(width));
      }
      v.set(bit + k, true);
    }
  }
  return v;
}

std::size_t BitVector::popcount() const {
  std::size_t n = 0;
  for (auto w : words_) n += static_cast<std::size_t>(std::popcount(w));
  return n;
}

bool BitVector::none() const {
  for (auto w : words_) {
    if (w != 0) return false;
  }
  return true;
}

std::string BitVector::to_hex() const {
  static constexpr char kDigits[] = "0123456789abcdef";
  const std::size_t digits = width_ == 0 ? 1 : (width_ + 3) / 4;
  std::string out(digits, '0');
  for (std::size_t d = 0; d < digits; ++d) {
    unsigned nibble = 0;
    for (unsigned k = 0; k < 4; ++k) {
      const std::size_t i = d * 4 + k;
      if (i < width_ && get(i)) nibble |= 1u << k;
    }
    out[digits - 1 - d] = kDigits[nibble];
  }
  return out;
}

std::string BitVector::to_binary() const {
  std::string out(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (get(i)) out[width_ - 1 - i] = '1';
  }
  return out;
}

BitVector& BitVector::operator^=(const BitVector& other) {
  if (other.width_ != width_) throw Error("BitVector width mismatch in xor");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

std::strong_ordering operator<=>(const BitVector& a, const BitVector& b) {
  if (auto c = a.width_ <=> b.width_; c != 0) return c;
  for (std::size_t i = a.words_.size(); i-- > 0;) {
    if (auto c = a.words_[i] <=> b.words_[i]; c != 0) return c;
  }
  return std::strong_ordering::equal;
}

std::size_t hamming_distance(const BitVector& a, const BitVector& b) {
  if (a.size() != b.size()) throw Error("hamming distance of vectors with different widths");
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.words().size(); ++i) {
    n += static_cast<std::size_t>(std::popcount(a.words()[i] ^ b.words()[i]));
  }
  return n;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t fingerprint(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace hardfsm
