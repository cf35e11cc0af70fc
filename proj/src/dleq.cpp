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

#include "blinddrm/dleq.hpp"

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"

namespace blinddrm {

void DlEqProof::encode_to(ByteWriter& w) const {
  commitment_a.encode_to(w);
  commitment_b.encode_to(w);
  challenge.encode_to(w);
  response.encode_to(w);
}

DlEqProof DlEqProof::decode(ByteReader& r, const GroupParams& params) {
  auto a = GroupElement::decode(r, params);
  auto b = GroupElement::decode(r, params);
  auto c = Exponent::decode(r, params);
  auto z = Exponent::decode(r, params);
  return {std::move(a), std::move(b), std::move(c), std::move(z)};
}

Exponent dleq_challenge(const GroupParams& params, const GroupElement& base1,
                        const GroupElement& y1, const GroupElement& base2,
                        const GroupElement& y2, const GroupElement& commitment_a,
                        const GroupElement& commitment_b) {
  ByteWriter t;
  t.text("blinddrm/dleq/v1");
  params.encode_to(t);
  for (const auto* e : {&base1, &y1, &base2, &y2, &commitment_a, &commitment_b}) {
    e->encode_to(t);
  }
  std::size_t width = params.element_bytes() + 16;
  mpz_class c = uint_from_bytes(hash_expand("blinddrm/dleq/challenge", t.data(), width));
  return Exponent(params, c);
}

DlEqProof dleq_prove(const Exponent& secret, const GroupElement& base1, const GroupElement& base2,
                     const GroupParams& params, Rng& rng) {
  GroupElement y1 = pow_mod(base1, secret, params);
  GroupElement y2 = pow_mod(base2, secret, params);
  Exponent k = Exponent::random(params, rng);
  GroupElement a = pow_mod(base1, k, params);
  GroupElement b = pow_mod(base2, k, params);
  Exponent c = dleq_challenge(params, base1, y1, base2, y2, a, b);
  Exponent z = exp_add(k, exp_mul(c, secret, params), params);
  return {std::move(a), std::move(b), std::move(c), std::move(z)};
}

bool dleq_equations_hold(const GroupElement& commitment_a, const GroupElement& commitment_b,
                         const Exponent& challenge, const Exponent& response,
                         const GroupElement& base1, const GroupElement& y1,
                         const GroupElement& base2, const GroupElement& y2,
                         const GroupParams& params) {
  auto lhs1 = pow_mod(base1, response, params);
  auto rhs1 = mul(commitment_a, pow_mod(y1, challenge, params), params);
  if (!(lhs1 == rhs1)) return false;
  auto lhs2 = pow_mod(base2, response, params);
  auto rhs2 = mul(commitment_b, pow_mod(y2, challenge, params), params);
  return lhs2 == rhs2;
}

bool dleq_verify(const DlEqProof& proof, const GroupElement& base1, const GroupElement& y1,
                 const GroupElement& base2, const GroupElement& y2, const GroupParams& params) {
  for (const auto* e : {&base1, &y1, &base2, &y2}) {
    if (!params.contains(e->value())) {
      throw Error(Errc::malformed_element, "dleq statement element outside subgroup");
    }
  }
  // A proof carrying out-of-group values is simply not a valid proof.
  if (!params.contains(proof.commitment_a.value()) ||
      !params.contains(proof.commitment_b.value()) ||
      proof.challenge.value() >= params.order() || proof.response.value() >= params.order()) {
    return false;
  }
  Exponent expected = dleq_challenge(params, base1, y1, base2, y2, proof.commitment_a,
                                     proof.commitment_b);
  if (!(expected == proof.challenge)) return false;
  return dleq_equations_hold(proof.commitment_a, proof.commitment_b, proof.challenge,
                             proof.response, base1, y1, base2, y2, params);
}

}  // namespace blinddrm
