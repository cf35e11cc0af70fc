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

#include "blinddrm/group.hpp"

namespace blinddrm {

/// Non-interactive proof that log_{base1}(y1) = log_{base2}(y2).
///
/// Prover picks k, commits A = base1^k, B = base2^k, derives the challenge
/// c = H(params, base1, y1, base2, y2, A, B) mod q and answers z = k + c*x.
/// The verifier checks base1^z = A * y1^c and base2^z = B * y2^c and that c
/// is the transcript hash.
struct DlEqProof {
  GroupElement commitment_a;
  GroupElement commitment_b;
  Exponent challenge;
  Exponent response;

  void encode_to(ByteWriter& w) const;
  static DlEqProof decode(ByteReader& r, const GroupParams& params);
  bool operator==(const DlEqProof&) const = default;
};

DlEqProof dleq_prove(const Exponent& secret, const GroupElement& base1, const GroupElement& base2,
                     const GroupParams& params, Rng& rng);

/// Throws Errc::malformed_element if any input is outside the subgroup.
bool dleq_verify(const DlEqProof& proof, const GroupElement& base1, const GroupElement& y1,
                 const GroupElement& base2, const GroupElement& y2, const GroupParams& params);

Exponent dleq_challenge(const GroupParams& params, const GroupElement& base1,
                        const GroupElement& y1, const GroupElement& base2,
                        const GroupElement& y2, const GroupElement& commitment_a,
                        const GroupElement& commitment_b);

/// The two verification equations for an externally chosen challenge
/// (the interactive form of the protocol).
bool dleq_equations_hold(const GroupElement& commitment_a, const GroupElement& commitment_b,
                         const Exponent& challenge, const Exponent& response,
                         const GroupElement& base1, const GroupElement& y1,
                         const GroupElement& base2, const GroupElement& y2,
                         const GroupParams& params);

}  // namespace blinddrm
