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

#include "blinddrm/bytes.hpp"
#include "blinddrm/rng.hpp"

namespace blinddrm {

/// RSA full-domain-hash signatures. A signature is exactly modulus-width,
/// so with the modulus sized to the group each signature costs one group
/// element of bandwidth.
struct VerifyKey {
  mpz_class modulus;
  mpz_class exponent;

  unsigned bits() const;
  std::size_t signature_bytes() const { return (bits() + 7) / 8; }

  Bytes to_bytes() const;
  static VerifyKey from_bytes(ByteView bytes);
  bool operator==(const VerifyKey&) const = default;
};

struct SigningKey {
  mpz_class modulus;
  mpz_class public_exponent;
  mpz_class private_exponent;

  VerifyKey verify_key() const { return {modulus, public_exponent}; }
  Bytes to_bytes() const;
  static SigningKey from_bytes(ByteView bytes);
  bool operator==(const SigningKey&) const = default;
};

/// Smallest modulus we will generate; below this random tampering starts
/// colliding with valid signatures at measurable rates.
inline constexpr unsigned kMinSignatureBits = 64;

SigningKey generate_signing_key(unsigned bits, Rng& rng);

/// Counted as one signing.
Bytes sign(const SigningKey& key, ByteView message);
/// Counted as one verification. Never throws; malformed input is `false`.
bool verify(const VerifyKey& key, ByteView message, ByteView signature);

}  // namespace blinddrm
