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

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blinddrm/catalog.hpp"
#include "blinddrm/dleq.hpp"
#include "blinddrm/purchase.hpp"

namespace blinddrm {

enum class DisputeKind { b, c, d };
const char* dispute_kind_name(DisputeKind kind);

enum class Outcome { seller_at_fault, buyer_claim_rejected, seller_must_resign, escalated_to_d };
const char* outcome_name(Outcome outcome);

/// Which of the three seller-honesty procedures settles a type-D case.
enum class DMethod { proof = 1, chain = 2, reveal = 3 };

/// One exchanged step as the arbitrator sees it: blinded values only.
struct DisputeStep {
  GroupElement q;  // request Q_k
  GroupElement n;  // response N_k
  std::uint64_t power = 1;
  Bytes signature;
  bool operator==(const DisputeStep&) const = default;
};

/// Evidence file. Public catalog data is referenced by digest rather than
/// copied, so a type C or D record holds nothing but blinded step values.
struct DisputeCase {
  DisputeKind kind = DisputeKind::d;
  std::string catalog_digest;
  std::vector<DisputeStep> steps;  // type C: exactly the disputed step
  DMethod method = DMethod::proof;  // type D only

  // Type B: the buyer gives up privacy to prove what was delivered.
  std::string license_id;
  std::uint64_t start_level = 0;
  std::optional<GroupElement> start_key;
  std::optional<GroupElement> key;
  std::vector<Exponent> alphas;  // one per step
  Bytes plaintext;               // LicensePlaintext::encode()

  std::string serialize() const;
  /// Throws Errc::parse_error or Errc::malformed_evidence.
  static DisputeCase parse(std::string_view text, const GroupParams& params);
};

/// Hex SHA-256 of the catalog's serialized form.
std::string catalog_digest(const Catalog& catalog);

DisputeCase make_type_b_case(const PurchaseSession& session, const LicensePlaintext& plaintext);
/// From a session whose last response was rejected for its signature.
DisputeCase make_type_c_case(const PurchaseSession& session);
DisputeCase make_type_d_case(const PurchaseSession& session, DMethod method);

struct Verdict {
  Outcome outcome = Outcome::buyer_claim_rejected;
  std::string rationale;
  std::uint64_t checked_steps = 0;
  std::optional<std::size_t> failing_step;  // 1-based
  bool escalated = false;
  /// Type C: the seller's values for the disputed request and a signature
  /// over them, handed to the buyer.
  std::optional<GroupElement> forwarded_response;
  std::optional<Bytes> forwarded_signature;

  /// Stable `key: value` rendering.
  std::string report() const;
};

/// Everything method 2 asks of the seller for one license.
struct ChainReveal {
  /// c_j = x^(s^j) for j = 1..price; the last one is the license key.
  std::vector<GroupElement> chain;
  /// Link j proves log_{c_(j-1)}(c_j) = log_g(K_1), with c_0 = x.
  std::vector<DlEqProof> link_proofs;
  /// Step k proves log_{Q_k}(N_k) = log_x(c_t) for that step's power t.
  std::vector<DlEqProof> step_proofs;
};

/// The seller as the arbitrator reaches it. Implementations signal an
/// unreachable seller with Errc::seller_unresponsive, timeout or
/// connection_closed.
class SellerResponder {
 public:
  virtual ~SellerResponder() = default;
  /// Recompute the answer to `q` at power t and sign it again.
  virtual StepResponse recompute(const GroupElement& q, std::uint64_t power) = 0;
  /// Proof that log_q(n) = log_g(K_t).
  virtual DlEqProof prove_step(const GroupElement& q, const GroupElement& n,
                               std::uint64_t power) = 0;
  virtual ChainReveal reveal_chain(const std::string& license_id,
                                   const std::vector<DisputeStep>& steps) = 0;
  virtual Exponent reveal_secret() = 0;
};

/// Answers with the real keys; a seller that cheated during the purchase
/// cannot produce proofs for the cheated step.
class KeyedSeller : public SellerResponder {
 public:
  KeyedSeller(const SellerKeys& keys, const Catalog& catalog, Rng rng);

  StepResponse recompute(const GroupElement& q, std::uint64_t power) override;
  DlEqProof prove_step(const GroupElement& q, const GroupElement& n,
                       std::uint64_t power) override;
  ChainReveal reveal_chain(const std::string& license_id,
                           const std::vector<DisputeStep>& steps) override;
  Exponent reveal_secret() override;

 private:
  const SellerKeys& keys_;
  const Catalog& catalog_;
  Rng rng_;
};

/// Published terms against the terms actually encrypted.
Verdict resolve_type_b(const DisputeCase& c, const Catalog& catalog);

/// Invalid step signature. With follow_escalation false a value conflict
/// stops at Outcome::escalated_to_d.
Verdict resolve_type_c(const DisputeCase& c, const Catalog& catalog, SellerResponder& seller,
                       bool follow_escalation = true);

Verdict resolve_type_d_method1(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               SellerResponder& seller);
/// `rng` draws the audited license. Throws Errc::chain_length_mismatch if no
/// catalog license is long enough to cover the disputed steps.
Verdict resolve_type_d_method2(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               SellerResponder& seller, Rng& rng);
Verdict resolve_type_d_method3(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               const Exponent& s_revealed);

/// Checks the catalog digest and dispatches on kind (and method for D).
/// Method 3 fetches s through `seller`.
Verdict arbitrate(const DisputeCase& c, const Catalog& catalog, SellerResponder& seller,
                  Rng& rng);

}  // namespace blinddrm
