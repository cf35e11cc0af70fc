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

#include "blinddrm/signature.hpp"

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"
#include "blinddrm/metrics.hpp"

namespace blinddrm {

namespace {

mpz_class full_domain_hash(const mpz_class& modulus, ByteView message) {
  ByteWriter input;
  input.uint(modulus).bytes(message);
  std::size_t width = (mpz_sizeinbase(modulus.get_mpz_t(), 2) + 7) / 8 + 16;
  return uint_from_bytes(hash_expand("blinddrm/rsa-fdh", input.data(), width)) % modulus;
}

mpz_class random_prime(unsigned bits, Rng& rng) {
  for (;;) {
    mpz_class p = rng.bits(bits);
    // Top two bits set so the product has exactly 2*bits bits.
    mpz_setbit(p.get_mpz_t(), bits - 1);
    mpz_setbit(p.get_mpz_t(), bits - 2);
    mpz_setbit(p.get_mpz_t(), 0);
    if (mpz_probab_prime_p(p.get_mpz_t(), 30) > 0) return p;
  }
}

}  // namespace

unsigned VerifyKey::bits() const {
  return static_cast<unsigned>(mpz_sizeinbase(modulus.get_mpz_t(), 2));
}

Bytes VerifyKey::to_bytes() const {
  ByteWriter w;
  w.uint(modulus).uint(exponent);
  return w.take();
}

VerifyKey VerifyKey::from_bytes(ByteView bytes) {
  ByteReader r(bytes);
  VerifyKey k;
  k.modulus = r.uint();
  k.exponent = r.uint();
  r.expect_end();
  if (k.modulus < 3 || k.exponent < 3) r.fail("degenerate verification key");
  return k;
}

Bytes SigningKey::to_bytes() const {
  ByteWriter w;
  w.uint(modulus).uint(public_exponent).uint(private_exponent);
  return w.take();
}

SigningKey SigningKey::from_bytes(ByteView bytes) {
  ByteReader r(bytes);
  SigningKey k;
  k.modulus = r.uint();
  k.public_exponent = r.uint();
  k.private_exponent = r.uint();
  r.expect_end();
  return k;
}

SigningKey generate_signing_key(unsigned bits, Rng& rng) {
  if (bits < kMinSignatureBits || bits % 2 != 0) {
    throw Error(Errc::invalid_argument, "signature modulus must be even and >= 64 bits");
  }
  const mpz_class e = 65537;
  for (;;) {
    mpz_class p = random_prime(bits / 2, rng);
    mpz_class q = random_prime(bits / 2, rng);
    if (p == q) continue;
    mpz_class phi = (p - 1) * (q - 1);
    mpz_class d;
    if (mpz_invert(d.get_mpz_t(), e.get_mpz_t(), phi.get_mpz_t()) == 0) continue;
    return {p * q, e, d};
  }
}

Bytes sign(const SigningKey& key, ByteView message) {
  count::signing();
  mpz_class h = full_domain_hash(key.modulus, message);
  mpz_class s;
  mpz_powm(s.get_mpz_t(), h.get_mpz_t(), key.private_exponent.get_mpz_t(),
           key.modulus.get_mpz_t());
  return uint_to_fixed(s, key.verify_key().signature_bytes());
}

bool verify(const VerifyKey& key, ByteView message, ByteView signature) {
  count::verification();
  if (key.modulus < 3 || signature.size() != key.signature_bytes()) return false;
  mpz_class s = uint_from_bytes(signature);
  if (s >= key.modulus) return false;
  mpz_class recovered;
  mpz_powm(recovered.get_mpz_t(), s.get_mpz_t(), key.exponent.get_mpz_t(),
           key.modulus.get_mpz_t());
  return recovered == full_domain_hash(key.modulus, message);
}

}  // namespace blinddrm
