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
#include <string_view>

#include "blinddrm/bytes.hpp"
#include "blinddrm/rng.hpp"

namespace blinddrm {

class GroupParams;

/// Member of the prime-order-q subgroup (the quadratic residues) of Z*_n.
class GroupElement {
 public:
  /// Validates membership; throws Errc::malformed_element.
  GroupElement(const GroupParams& params, mpz_class value);

  /// For results of group operations on already-validated elements.
  static GroupElement trusted(mpz_class value) { return GroupElement(std::move(value)); }

  const mpz_class& value() const { return value_; }
  /// Length-prefixed minimal big-endian encoding.
  void encode_to(ByteWriter& w) const { w.uint(value_); }
  Bytes encode() const;
  static GroupElement decode(ByteReader& r, const GroupParams& params);

  bool operator==(const GroupElement& o) const { return value_ == o.value_; }

 private:
  explicit GroupElement(mpz_class value) : value_(std::move(value)) {}
  mpz_class value_;
};

/// Exponent of the order-q subgroup, always reduced into [0, q-1].
class Exponent {
 public:
  Exponent(const GroupParams& params, const mpz_class& value);

  static Exponent trusted(mpz_class reduced) { return Exponent(std::move(reduced)); }
  static Exponent random(const GroupParams& params, Rng& rng);
  /// Uniform in [1, q-1].
  static Exponent random_nonzero(const GroupParams& params, Rng& rng);

  const mpz_class& value() const { return value_; }
  bool is_zero() const { return value_ == 0; }
  void encode_to(ByteWriter& w) const { w.uint(value_); }
  static Exponent decode(ByteReader& r, const GroupParams& params);

  bool operator==(const Exponent& o) const { return value_ == o.value_; }

 private:
  explicit Exponent(mpz_class v) : value_(std::move(v)) {}
  mpz_class value_;
};

/// Safe-prime group description: n = 2q + 1 with n and q prime, and g a
/// generator of the order-q subgroup.
class GroupParams {
 public:
  /// Validates the structure; throws Errc::invalid_argument.
  GroupParams(mpz_class modulus, mpz_class generator);

  const mpz_class& modulus() const { return n_; }
  const mpz_class& order() const { return q_; }
  unsigned bits() const { return bits_; }
  /// Bytes in a fixed-width encoding of one element.
  std::size_t element_bytes() const { return (bits_ + 7) / 8; }

  GroupElement generator() const { return GroupElement::trusted(g_); }
  GroupElement identity() const { return GroupElement::trusted(1); }

  /// Range check plus Jacobi symbol; equivalent to v^q = 1 (mod n) for a
  /// safe prime, without spending an exponentiation.
  bool contains(const mpz_class& v) const;

  void encode_to(ByteWriter& w) const { w.uint(n_).uint(g_); }

  bool operator==(const GroupParams& o) const { return n_ == o.n_ && g_ == o.g_; }

 private:
  mpz_class n_;
  mpz_class q_;
  mpz_class g_;
  unsigned bits_;
};

/// Random safe-prime group with an exactly `bits`-bit modulus. bits >= 5.
GroupParams gen_params(unsigned bits, Rng& rng);
GroupParams gen_params(unsigned bits, std::uint64_t seed);

/// base^e mod n. The only place group exponentiations are counted.
GroupElement pow_mod(const GroupElement& base, const Exponent& e, const GroupParams& params);
/// e^-1 mod n; counted as one division.
GroupElement inv_mod(const GroupElement& e, const GroupParams& params);
/// a * b^-1 mod n; counted as one division.
GroupElement div_mod(const GroupElement& a, const GroupElement& b, const GroupParams& params);
GroupElement mul(const GroupElement& a, const GroupElement& b, const GroupParams& params);

Exponent exp_add(const Exponent& a, const Exponent& b, const GroupParams& params);
Exponent exp_mul(const Exponent& a, const Exponent& b, const GroupParams& params);
/// base^power mod q: the exponent tower step s -> s^t.
Exponent exp_pow(const Exponent& base, std::uint64_t power, const GroupParams& params);

/// Deterministic hash onto the subgroup (squared SHA-256 expansion), never 1.
GroupElement hash_to_group(ByteView label, const GroupParams& params);
inline GroupElement hash_to_group(std::string_view label, const GroupParams& params) {
  return hash_to_group(as_bytes(label), params);
}

}  // namespace blinddrm
