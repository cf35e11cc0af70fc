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

#include <array>
#include <cstdint>
#include <string_view>

#include "blinddrm/bytes.hpp"

namespace blinddrm {

/// Hash-based deterministic random bit generator. Seeded from a 64-bit value
/// for reproducible runs, or from the OS entropy pool for real deployments.
/// Not thread-safe; give each actor its own instance (see fork()).
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  static Rng from_os();

  void fill(std::span<std::uint8_t> out);
  Bytes bytes(std::size_t n);
  std::uint64_t next_u64();
  /// Uniform in [0, bound) by rejection sampling; bound must be positive.
  mpz_class below(const mpz_class& bound);
  /// Uniform in [lo, hi].
  mpz_class between(const mpz_class& lo, const mpz_class& hi);
  /// Uniform integer of at most `bits` bits.
  mpz_class bits(unsigned bits);

  /// Independent child stream, labelled so different roles never share output.
  Rng fork(std::string_view label);

 private:
  explicit Rng(const std::array<std::uint8_t, 32>& key) : key_(key) {}
  void refill();

  std::array<std::uint8_t, 32> key_{};
  std::uint64_t counter_ = 0;
  std::array<std::uint8_t, 32> block_{};
  std::size_t used_ = 32;
};

}  // namespace blinddrm
