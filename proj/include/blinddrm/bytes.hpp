// Copyright 2026 The blinddrm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace blinddrm {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

inline ByteView as_bytes(std::string_view s) {
  return {reinterpret_cast<const std::uint8_t*>(s.data()), s.size()};
}

/// Unsigned big-endian magnitude with no leading zero bytes; zero is empty.
Bytes uint_to_bytes(const mpz_class& v);
mpz_class uint_from_bytes(ByteView bytes);
/// Fixed-width big-endian, left-padded with zeros. Throws if v does not fit.
Bytes uint_to_fixed(const mpz_class& v, std::size_t width);

std::string hex_encode(ByteView bytes);
Bytes hex_decode(std::string_view hex);  // throws Errc::parse_error
std::string to_hex(const mpz_class& v);  // lowercase, minimal, "0" for zero
mpz_class from_hex(std::string_view hex);

std::string base64_encode(ByteView bytes);
Bytes base64_decode(std::string_view text);  // throws Errc::parse_error

// Canonical encoding shared by signatures, proofs, evidence files and the
// wire: fixed-width big-endian integers, and 4-byte big-endian length
// prefixes in front of every variable-length field.
class ByteWriter {
 public:
  ByteWriter& u8(std::uint8_t v);
  ByteWriter& u32(std::uint32_t v);
  ByteWriter& u64(std::uint64_t v);
  ByteWriter& raw(ByteView v);
  ByteWriter& bytes(ByteView v);
  ByteWriter& text(std::string_view v);
  ByteWriter& uint(const mpz_class& v);

  const Bytes& data() const { return out_; }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

/// Bounds-checked reader. Every failure raises DecodeError with the offset.
class ByteReader {
 public:
  explicit ByteReader(ByteView in, std::size_t max_field = 1u << 20)
      : in_(in), max_field_(max_field) {}

  std::uint8_t u8();
  std::uint32_t u32();
  std::uint64_t u64();
  Bytes raw(std::size_t n);
  Bytes bytes();
  std::string text();
  /// Rejects non-minimal encodings (leading zero byte).
  mpz_class uint();
  /// Length of a following count-prefixed list; bounded by remaining input.
  std::uint32_t count(std::size_t min_item_size = 1);

  std::size_t offset() const { return pos_; }
  bool at_end() const { return pos_ == in_.size(); }
  void expect_end() const;
  [[noreturn]] void fail(const std::string& what) const;

 private:
  void need(std::size_t n) const;

  ByteView in_;
  std::size_t pos_ = 0;
  std::size_t max_field_;
};

}  // namespace blinddrm
