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

#include "blinddrm/group.hpp"

#include <array>

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"
#include "blinddrm/metrics.hpp"

namespace blinddrm {

namespace {

constexpr int kPrimeReps = 30;

bool is_prime(const mpz_class& v) { return mpz_probab_prime_p(v.get_mpz_t(), kPrimeReps) > 0; }

constexpr std::array<unsigned, 24> kSmallPrimes = {3,  5,  7,  11, 13, 17, 19, 23, 29, 31, 37, 41,
                                                   43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97};

// Rejects q when q or 2q+1 has a small factor (and is not that factor).
bool survives_sieve(const mpz_class& q) {
  if (q < 1000) return true;
  for (unsigned p : kSmallPrimes) {
    unsigned long r = mpz_fdiv_ui(q.get_mpz_t(), p);
    if (r == 0 || (2 * r + 1) % p == 0) return false;
  }
  return true;
}

}  // namespace

GroupElement::GroupElement(const GroupParams& params, mpz_class value) : value_(std::move(value)) {
  if (!params.contains(value_)) {
    throw Error(Errc::malformed_element, "value is not in the order-q subgroup");
  }
}

Bytes GroupElement::encode() const {
  ByteWriter w;
  encode_to(w);
  return w.take();
}

GroupElement GroupElement::decode(ByteReader& r, const GroupParams& params) {
  std::size_t start = r.offset();
  mpz_class v = r.uint();
  if (!params.contains(v)) {
    throw DecodeError(Errc::malformed_element, start, "group element outside subgroup");
  }
  return GroupElement(std::move(v));
}

Exponent::Exponent(const GroupParams& params, const mpz_class& value) {
  mpz_fdiv_r(value_.get_mpz_t(), value.get_mpz_t(), params.order().get_mpz_t());
}

Exponent Exponent::random(const GroupParams& params, Rng& rng) {
  return Exponent(rng.below(params.order()));
}

Exponent Exponent::random_nonzero(const GroupParams& params, Rng& rng) {
  return Exponent(rng.between(1, params.order() - 1));
}

Exponent Exponent::decode(ByteReader& r, const GroupParams& params) {
  std::size_t start = r.offset();
  mpz_class v = r.uint();
  if (v >= params.order()) {
    throw DecodeError(Errc::malformed_element, start, "exponent not reduced mod q");
  }
  return Exponent(std::move(v));
}

GroupParams::GroupParams(mpz_class modulus, mpz_class generator)
    : n_(std::move(modulus)), g_(std::move(generator)) {
  if (n_ < 5 || !is_prime(n_)) throw Error(Errc::invalid_argument, "modulus is not prime");
  q_ = (n_ - 1) / 2;
  if (!is_prime(q_)) throw Error(Errc::invalid_argument, "modulus is not a safe prime");
  if (g_ < 2 || g_ >= n_) throw Error(Errc::invalid_argument, "generator out of range");
  mpz_class check;
  mpz_powm(check.get_mpz_t(), g_.get_mpz_t(), q_.get_mpz_t(), n_.get_mpz_t());
  if (check != 1) throw Error(Errc::invalid_argument, "generator is not of order q");
  bits_ = static_cast<unsigned>(mpz_sizeinbase(n_.get_mpz_t(), 2));
}

bool GroupParams::contains(const mpz_class& v) const {
  if (v < 1 || v >= n_) return false;
  return mpz_jacobi(v.get_mpz_t(), n_.get_mpz_t()) == 1;
}

GroupParams gen_params(unsigned bits, Rng& rng) {
  if (bits < 5) throw Error(Errc::invalid_argument, "group needs at least 5 bits");
  mpz_class q;
  mpz_class n;
  for (;;) {
    q = rng.bits(bits - 1);
    mpz_setbit(q.get_mpz_t(), bits - 2);
    mpz_setbit(q.get_mpz_t(), 0);
    if (!survives_sieve(q)) continue;
    n = 2 * q + 1;
    if (is_prime(q) && is_prime(n)) break;
  }
  for (;;) {
    mpz_class h = rng.between(2, n - 2);
    mpz_class g = h * h % n;
    if (g != 1) return GroupParams(n, g);
  }
}

GroupParams gen_params(unsigned bits, std::uint64_t seed) {
  Rng rng(seed);
  return gen_params(bits, rng);
}

GroupElement pow_mod(const GroupElement& base, const Exponent& e, const GroupParams& params) {
  count::exponentiation();
  mpz_class out;
  mpz_powm(out.get_mpz_t(), base.value().get_mpz_t(), e.value().get_mpz_t(),
           params.modulus().get_mpz_t());
  return GroupElement::trusted(std::move(out));
}

namespace {

mpz_class invert(const mpz_class& v, const mpz_class& n) {
  mpz_class out;
  if (mpz_invert(out.get_mpz_t(), v.get_mpz_t(), n.get_mpz_t()) == 0) {
    throw Error(Errc::malformed_element, "element not invertible");
  }
  return out;
}

}  // namespace

GroupElement inv_mod(const GroupElement& e, const GroupParams& params) {
  count::division();
  return GroupElement::trusted(invert(e.value(), params.modulus()));
}

GroupElement div_mod(const GroupElement& a, const GroupElement& b, const GroupParams& params) {
  count::division();
  mpz_class out = a.value() * invert(b.value(), params.modulus()) % params.modulus();
  return GroupElement::trusted(std::move(out));
}

GroupElement mul(const GroupElement& a, const GroupElement& b, const GroupParams& params) {
  return GroupElement::trusted(a.value() * b.value() % params.modulus());
}

Exponent exp_add(const Exponent& a, const Exponent& b, const GroupParams& params) {
  return Exponent(params, a.value() + b.value());
}

Exponent exp_mul(const Exponent& a, const Exponent& b, const GroupParams& params) {
  return Exponent(params, a.value() * b.value());
}

Exponent exp_pow(const Exponent& base, std::uint64_t power, const GroupParams& params) {
  mpz_class out;
  mpz_class p;
  mpz_import(p.get_mpz_t(), 1, 1, sizeof(power), 0, 0, &power);
  mpz_powm(out.get_mpz_t(), base.value().get_mpz_t(), p.get_mpz_t(),
           params.order().get_mpz_t());
  return Exponent::trusted(std::move(out));
}

GroupElement hash_to_group(ByteView label, const GroupParams& params) {
  if (label.empty()) throw Error(Errc::invalid_argument, "empty hash-to-group label");
  const std::size_t width = params.element_bytes() + 16;
  for (std::uint32_t counter = 0;; ++counter) {
    ByteWriter input;
    params.encode_to(input);
    input.u32(counter).bytes(label);
    mpz_class u = uint_from_bytes(hash_expand("blinddrm/hash-to-group", input.data(), width));
    u %= params.modulus();
    if (u == 0) continue;
    mpz_class e = u * u % params.modulus();
    if (e != 1) return GroupElement::trusted(std::move(e));
  }
}

}  // namespace blinddrm
