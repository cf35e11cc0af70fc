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

#include "blinddrm/rng.hpp"

#include <openssl/rand.h>

#include <algorithm>

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"

namespace blinddrm {

Rng::Rng(std::uint64_t seed) {
  ByteWriter w;
  w.text("blinddrm/rng/seed").u64(seed);
  key_ = sha256(w.data());
}

Rng Rng::from_os() {
  std::array<std::uint8_t, 32> key{};
  if (RAND_bytes(key.data(), static_cast<int>(key.size())) != 1) {
    throw std::runtime_error("OS entropy unavailable");
  }
  return Rng(key);
}

void Rng::refill() {
  ByteWriter w;
  w.raw(key_).u64(counter_++);
  block_ = sha256(w.data());
  used_ = 0;
}

void Rng::fill(std::span<std::uint8_t> out) {
  for (auto& b : out) {
    if (used_ == block_.size()) refill();
    b = block_[used_++];
  }
}

Bytes Rng::bytes(std::size_t n) {
  Bytes out(n);
  fill(out);
  return out;
}

std::uint64_t Rng::next_u64() {
  std::array<std::uint8_t, 8> b{};
  fill(b);
  std::uint64_t v = 0;
  for (auto x : b) v = v << 8 | x;
  return v;
}

mpz_class Rng::bits(unsigned nbits) {
  Bytes b = bytes((nbits + 7) / 8);
  if (nbits % 8 != 0 && !b.empty()) {
    b[0] &= static_cast<std::uint8_t>((1u << (nbits % 8)) - 1);
  }
  return uint_from_bytes(b);
}

mpz_class Rng::below(const mpz_class& bound) {
  if (bound <= 0) throw Error(Errc::invalid_argument, "empty sampling range");
  unsigned nbits = static_cast<unsigned>(mpz_sizeinbase(bound.get_mpz_t(), 2));
  for (;;) {
    mpz_class v = bits(nbits);
    if (v < bound) return v;
  }
}

mpz_class Rng::between(const mpz_class& lo, const mpz_class& hi) {
  if (hi < lo) throw Error(Errc::invalid_argument, "empty sampling range");
  mpz_class span = hi - lo + 1;
  return lo + below(span);
}

Rng Rng::fork(std::string_view label) {
  ByteWriter w;
  w.raw(bytes(32)).text(label);
  return Rng(sha256(w.data()));
}

}  // namespace blinddrm
