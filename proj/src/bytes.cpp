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

#include "blinddrm/bytes.hpp"

#include <openssl/evp.h>

#include "blinddrm/errors.hpp"

namespace blinddrm {

Bytes uint_to_bytes(const mpz_class& v) {
  if (sgn(v) < 0) throw Error(Errc::invalid_argument, "negative integer");
  if (v == 0) return {};
  std::size_t count = (mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8;
  Bytes out(count);
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

mpz_class uint_from_bytes(ByteView bytes) {
  mpz_class v;
  if (!bytes.empty()) {
    mpz_import(v.get_mpz_t(), bytes.size(), 1, 1, 1, 0, bytes.data());
  }
  return v;
}

Bytes uint_to_fixed(const mpz_class& v, std::size_t width) {
  Bytes minimal = uint_to_bytes(v);
  if (minimal.size() > width) {
    throw Error(Errc::invalid_argument, "integer wider than field");
  }
  Bytes out(width - minimal.size(), 0);
  out.insert(out.end(), minimal.begin(), minimal.end());
  return out;
}

std::string hex_encode(ByteView bytes) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (auto b : bytes) {
    out.push_back(kDigits[b >> 4]);
    out.push_back(kDigits[b & 0xf]);
  }
  return out;
}

namespace {

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

Bytes hex_decode(std::string_view hex) {
  if (hex.size() % 2 != 0) throw Error(Errc::parse_error, "odd hex length");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw Error(Errc::parse_error, "bad hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

std::string to_hex(const mpz_class& v) { return v.get_str(16); }

mpz_class from_hex(std::string_view hex) {
  if (hex.empty()) throw Error(Errc::parse_error, "empty hex integer");
  for (char c : hex) {
    // Lowercase only, so that serialization round-trips byte-exactly.
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) {
      throw Error(Errc::parse_error, "bad hex integer '" + std::string(hex) + "'");
    }
  }
  if (hex.size() > 1 && hex[0] == '0') {
    throw Error(Errc::parse_error, "non-canonical hex integer");
  }
  return mpz_class(std::string(hex), 16);
}

std::string base64_encode(ByteView bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                          bytes.data(), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

Bytes base64_decode(std::string_view text) {
  if (text.size() % 4 != 0) throw Error(Errc::parse_error, "base64 length");
  Bytes out(3 * text.size() / 4);
  int n = EVP_DecodeBlock(out.data(),
                          reinterpret_cast<const unsigned char*>(text.data()),
                          static_cast<int>(text.size()));
  if (n < 0) throw Error(Errc::parse_error, "bad base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the bytes that correspond to '=' padding.
  if (!text.empty() && text.back() == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  if (base64_encode(out) != text) {
    throw Error(Errc::parse_error, "non-canonical base64");
  }
  return out;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
  out_.push_back(v);
  return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) {
    out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  return *this;
}

ByteWriter& ByteWriter::raw(ByteView v) {
  out_.insert(out_.end(), v.begin(), v.end());
  return *this;
}

ByteWriter& ByteWriter::bytes(ByteView v) {
  if (v.size() > UINT32_MAX) throw Error(Errc::invalid_argument, "field too long");
  u32(static_cast<std::uint32_t>(v.size()));
  return raw(v);
}

ByteWriter& ByteWriter::text(std::string_view v) { return bytes(as_bytes(v)); }

ByteWriter& ByteWriter::uint(const mpz_class& v) { return bytes(uint_to_bytes(v)); }

void ByteReader::fail(const std::string& what) const {
  throw DecodeError(Errc::malformed_message, pos_, what);
}

void ByteReader::need(std::size_t n) const {
  if (in_.size() - pos_ < n) fail("truncated input");
}

std::uint8_t ByteReader::u8() {
  need(1);
  return in_[pos_++];
}

std::uint32_t ByteReader::u32() {
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | in_[pos_++];
  return v;
}

std::uint64_t ByteReader::u64() {
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | in_[pos_++];
  return v;
}

Bytes ByteReader::raw(std::size_t n) {
  need(n);
  Bytes out(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
            in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
  pos_ += n;
  return out;
}

Bytes ByteReader::bytes() {
  std::size_t start = pos_;
  std::uint32_t n = u32();
  if (n > max_field_) {
    pos_ = start;
    fail("field length " + std::to_string(n) + " exceeds limit");
  }
  if (in_.size() - pos_ < n) {
    pos_ = start;
    fail("field length " + std::to_string(n) + " exceeds input");
  }
  return raw(n);
}

std::string ByteReader::text() {
  Bytes b = bytes();
  return std::string(b.begin(), b.end());
}

mpz_class ByteReader::uint() {
  std::size_t start = pos_;
  Bytes b = bytes();
  if (!b.empty() && b[0] == 0) {
    pos_ = start + 4;  // the leading zero byte
    fail("non-minimal integer encoding");
  }
  return uint_from_bytes(b);
}

std::uint32_t ByteReader::count(std::size_t min_item_size) {
  std::size_t start = pos_;
  std::uint32_t n = u32();
  if (min_item_size > 0 &&
      static_cast<std::uint64_t>(n) * min_item_size > in_.size() - pos_) {
    pos_ = start;
    fail("list count " + std::to_string(n) + " exceeds input");
  }
  return n;
}

void ByteReader::expect_end() const {
  if (!at_end()) fail("trailing bytes");
}

}  // namespace blinddrm
