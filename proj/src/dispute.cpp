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

#include "blinddrm/dispute.hpp"

#include <algorithm>

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"
#include "blinddrm/kvtext.hpp"

namespace blinddrm {

const char* dispute_kind_name(DisputeKind kind) {
  switch (kind) {
    case DisputeKind::b: return "B";
    case DisputeKind::c: return "C";
    case DisputeKind::d: return "D";
  }
  return "?";
}

const char* outcome_name(Outcome outcome) {
  switch (outcome) {
    case Outcome::seller_at_fault: return "seller-at-fault";
    case Outcome::buyer_claim_rejected: return "buyer-claim-rejected";
    case Outcome::seller_must_resign: return "seller-must-resign";
    case Outcome::escalated_to_d: return "escalated-to-D";
  }
  return "?";
}

std::string catalog_digest(const Catalog& catalog) {
  auto d = sha256(as_bytes(catalog.serialize()));
  return hex_encode(d);
}

namespace {

constexpr std::string_view kCaseMagic = "blinddrm-dispute";

GroupElement element_field(KvReader& r, std::string_view key, const GroupParams& params) {
  std::string v = r.take(key);
  try {
    return GroupElement(params, from_hex(v));
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not a group element");
  }
}

mpz_class hex_field(KvReader& r, std::string_view key) {
  std::string v = r.take(key);
  try {
    return from_hex(v);
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not a hex integer");
  }
}

Bytes base64_field(KvReader& r, std::string_view key) {
  std::string v = r.take(key);
  try {
    return base64_decode(v);
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not canonical base64");
  }
}

std::vector<DisputeStep> steps_of(const std::vector<StepTranscript>& transcripts) {
  std::vector<DisputeStep> out;
  for (const auto& t : transcripts) out.push_back({t.request, t.response, t.power, t.step_signature});
  return out;
}

bool unresponsive(const Error& e) {
  return e.code() == Errc::seller_unresponsive || e.code() == Errc::timeout ||
         e.code() == Errc::connection_closed;
}

Verdict verdict(Outcome outcome, std::string rationale, std::uint64_t checked,
                std::optional<std::size_t> failing = std::nullopt) {
  Verdict v;
  v.outcome = outcome;
  v.rationale = std::move(rationale);
  v.checked_steps = checked;
  v.failing_step = failing;
  return v;
}

std::string step_label(std::size_t index) { return "step " + std::to_string(index + 1); }

/// Shared first pass of every type-D method: the buyer's evidence must be
/// signed by the seller, and every step power must be published.
std::optional<Verdict> check_step_signatures(const std::vector<DisputeStep>& steps,
                                             const Catalog& catalog) {
  if (steps.empty()) throw Error(Errc::malformed_evidence, "no steps in dispute");
  for (std::size_t k = 0; k < steps.size(); ++k) {
    catalog.k(steps[k].power);
    if (!verify_step_signature(catalog.verify_pk, steps[k].q, steps[k].n, steps[k].signature)) {
      return verdict(Outcome::buyer_claim_rejected,
                     step_label(k) + ": step signature does not verify", k, k + 1);
    }
  }
  return std::nullopt;
}

}  // namespace

std::string DisputeCase::serialize() const {
  KvWriter w;
  w.put(kCaseMagic, 1).put("kind", dispute_kind_name(kind)).put("catalog", catalog_digest);
  if (kind == DisputeKind::d) w.put("method", static_cast<std::uint64_t>(method));
  if (kind == DisputeKind::b) {
    w.put("license", license_id)
        .put("start_level", start_level)
        .put("start_key", start_key ? to_hex(start_key->value()) : "")
        .put("key", key ? to_hex(key->value()) : "")
        .put("plaintext", base64_encode(plaintext));
  }
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const auto& s = steps[i];
    w.put("step.q", to_hex(s.q.value()))
        .put("step.n", to_hex(s.n.value()))
        .put("step.t", s.power)
        .put("step.sig", base64_encode(s.signature));
    if (kind == DisputeKind::b && i < alphas.size()) w.put("step.alpha", to_hex(alphas[i].value()));
  }
  return w.str();
}

DisputeCase DisputeCase::parse(std::string_view text, const GroupParams& params) {
  KvReader r(text);
  if (r.take_u64(kCaseMagic) != 1) r.fail("unsupported case version");
  DisputeCase c;
  std::string kind = r.take("kind");
  if (kind == "B") {
    c.kind = DisputeKind::b;
  } else if (kind == "C") {
    c.kind = DisputeKind::c;
  } else if (kind == "D") {
    c.kind = DisputeKind::d;
  } else {
    r.fail("unknown dispute kind '" + kind + "'");
  }
  c.catalog_digest = r.take("catalog");
  if (c.kind == DisputeKind::d) {
    std::uint64_t m = r.take_u64("method");
    if (m < 1 || m > 3) r.fail("method must be 1, 2 or 3");
    c.method = static_cast<DMethod>(m);
  }
  if (c.kind == DisputeKind::b) {
    c.license_id = r.take("license");
    c.start_level = r.take_u64("start_level");
    c.start_key = element_field(r, "start_key", params);
    c.key = element_field(r, "key", params);
    c.plaintext = base64_field(r, "plaintext");
  }
  while (!r.at_end()) {
    DisputeStep s{element_field(r, "step.q", params), element_field(r, "step.n", params),
                  r.take_u64("step.t"), base64_field(r, "step.sig")};
    if (s.power == 0) r.fail("step power must be positive");
    c.steps.push_back(std::move(s));
    if (c.kind == DisputeKind::b) {
      mpz_class a = hex_field(r, "step.alpha");
      if (a >= params.order()) r.fail("step alpha out of range");
      c.alphas.push_back(Exponent::trusted(a));
    }
  }
  if (c.steps.empty()) throw Error(Errc::malformed_evidence, "case has no steps");
  if (c.kind == DisputeKind::c && c.steps.size() != 1) {
    throw Error(Errc::malformed_evidence, "a type C case disputes exactly one step");
  }
  return c;
}

DisputeCase make_type_b_case(const PurchaseSession& session, const LicensePlaintext& plaintext) {
  DisputeCase c;
  c.kind = DisputeKind::b;
  c.catalog_digest = catalog_digest(session.catalog());
  c.steps = steps_of(session.transcripts());
  c.license_id = session.license_id();
  c.start_level = session.start_level();
  c.start_key = session.start_key();
  c.key = session.acc();
  c.alphas = session.step_alphas();
  c.plaintext = plaintext.encode();
  return c;
}

DisputeCase make_type_c_case(const PurchaseSession& session) {
  if (!session.rejected()) {
    throw Error(Errc::invalid_argument, "session has no rejected step response");
  }
  const auto& rej = *session.rejected();
  DisputeCase c;
  c.kind = DisputeKind::c;
  c.catalog_digest = catalog_digest(session.catalog());
  c.steps.push_back({rej.request.m, rej.response.m_out, rej.power, rej.response.step_signature});
  return c;
}

DisputeCase make_type_d_case(const PurchaseSession& session, DMethod method) {
  DisputeCase c;
  c.kind = DisputeKind::d;
  c.method = method;
  c.catalog_digest = catalog_digest(session.catalog());
  c.steps = steps_of(session.transcripts());
  return c;
}

std::string Verdict::report() const {
  KvWriter w;
  w.put("outcome", outcome_name(outcome)).put("checked_steps", checked_steps);
  if (failing_step) w.put("failing_step", static_cast<std::uint64_t>(*failing_step));
  w.put("escalated", escalated ? 1 : 0);
  if (forwarded_response) w.put("forwarded_response", to_hex(forwarded_response->value()));
  if (forwarded_signature) w.put("forwarded_signature", base64_encode(*forwarded_signature));
  w.put("rationale", rationale);
  return w.str();
}

KeyedSeller::KeyedSeller(const SellerKeys& keys, const Catalog& catalog, Rng rng)
    : keys_(keys), catalog_(catalog), rng_(std::move(rng)) {}

StepResponse KeyedSeller::recompute(const GroupElement& q, std::uint64_t power) {
  const GroupParams& params = catalog_.params;
  GroupElement n = pow_mod(q, exp_pow(keys_.s, power, params), params);
  Bytes sig = sign(keys_.sign_sk, step_signature_payload(q, n));
  return {std::move(n), std::move(sig)};
}

DlEqProof KeyedSeller::prove_step(const GroupElement& q, const GroupElement&,
                                  std::uint64_t power) {
  const GroupParams& params = catalog_.params;
  return dleq_prove(exp_pow(keys_.s, power, params), q, params.generator(), params, rng_);
}

ChainReveal KeyedSeller::reveal_chain(const std::string& license_id,
                                      const std::vector<DisputeStep>& steps) {
  const GroupParams& params = catalog_.params;
  const LicenseEntry& entry = catalog_.license(license_id);
  ChainReveal out;
  GroupElement prev = entry.x;
  for (std::uint64_t j = 1; j <= entry.price; ++j) {
    GroupElement next = pow_mod(prev, keys_.s, params);
    out.link_proofs.push_back(dleq_prove(keys_.s, prev, params.generator(), params, rng_));
    out.chain.push_back(next);
    prev = std::move(next);
  }
  for (const auto& step : steps) {
    out.step_proofs.push_back(
        dleq_prove(exp_pow(keys_.s, step.power, params), step.q, entry.x, params, rng_));
  }
  return out;
}

Exponent KeyedSeller::reveal_secret() { return keys_.s; }

Verdict resolve_type_b(const DisputeCase& c, const Catalog& catalog) {
  if (c.kind != DisputeKind::b) throw Error(Errc::malformed_evidence, "not a type B case");
  if (!c.start_key || !c.key || c.alphas.size() != c.steps.size()) {
    throw Error(Errc::malformed_evidence, "type B case lacks key, start key or blinding values");
  }
  const LicenseEntry* entry = catalog.find(c.license_id);
  if (!entry) throw Error(Errc::malformed_evidence, "license '" + c.license_id + "' not in catalog");
  const GroupParams& params = catalog.params;
  const auto rejected = Outcome::buyer_claim_rejected;

  if (!verify_terms(catalog.verify_pk, entry->terms, entry->encrypted_license,
                    entry->terms_signature)) {
    return verdict(rejected, "published terms are not signed by the seller", 0);
  }
  if (c.start_level == 0 ? !(*c.start_key == entry->x) : c.start_level >= entry->price) {
    return verdict(rejected, "start key does not match the license", 0);
  }
  std::uint64_t total = 0;
  for (const auto& s : c.steps) total += s.power;
  if (total != entry->price - c.start_level) {
    return verdict(rejected, "steps pay " + std::to_string(total) + " of " +
                                 std::to_string(entry->price - c.start_level) + " units",
                   0);
  }

  GroupElement acc = *c.start_key;
  for (std::size_t k = 0; k < c.steps.size(); ++k) {
    const DisputeStep& s = c.steps[k];
    if (!verify_step_signature(catalog.verify_pk, s.q, s.n, s.signature)) {
      return verdict(rejected, step_label(k) + ": step signature does not verify", k, k + 1);
    }
    const GroupElement& kt = catalog.k(s.power);
    GroupElement expected_q = mul(pow_mod(params.generator(), c.alphas[k], params), acc, params);
    if (!(expected_q == s.q)) {
      return verdict(rejected, step_label(k) + ": request does not follow from the previous key",
                     k, k + 1);
    }
    acc = div_mod(s.n, pow_mod(kt, c.alphas[k], params), params);
  }
  const std::uint64_t checked = c.steps.size();
  if (!(acc == *c.key)) return verdict(rejected, "unblinded steps do not yield the claimed key", checked);

  LicensePlaintext pt;
  try {
    pt = decrypt_license(acc, entry->encrypted_license);
  } catch (const Error&) {
    return verdict(rejected, "key does not decrypt the license; not a terms dispute", checked);
  }
  if (pt.encode() != c.plaintext) {
    return verdict(rejected, "claimed plaintext differs from the decrypted license", checked);
  }
  if (pt.terms == entry->terms) {
    return verdict(rejected, "delivered terms match the published terms", checked);
  }
  return verdict(Outcome::seller_at_fault,
                 "delivered terms '" + pt.terms + "' differ from published '" + entry->terms + "'",
                 checked);
}

Verdict resolve_type_c(const DisputeCase& c, const Catalog& catalog, SellerResponder& seller,
                       bool follow_escalation) {
  if (c.kind != DisputeKind::c || c.steps.size() != 1) {
    throw Error(Errc::malformed_evidence, "not a type C case");
  }
  const DisputeStep& s = c.steps.front();
  const GroupElement& kt = catalog.k(s.power);
  if (verify_step_signature(catalog.verify_pk, s.q, s.n, s.signature)) {
    return verdict(Outcome::buyer_claim_rejected, "presented signature is valid", 1);
  }

  std::optional<StepResponse> mine;
  try {
    mine = seller.recompute(s.q, s.power);
  } catch (const Error& e) {
    if (!unresponsive(e)) throw;
    return verdict(Outcome::seller_at_fault, "seller did not answer the arbitrator", 0);
  }

  if (mine->m_out == s.n) {
    Verdict v = verdict(Outcome::seller_must_resign, "seller agrees on the step values", 1);
    v.forwarded_response = s.n;
    v.forwarded_signature = mine->step_signature;
    if (!verify_step_signature(catalog.verify_pk, s.q, s.n, mine->step_signature)) {
      v.rationale += "; replacement signature is also invalid";
    }
    return v;
  }

  if (!follow_escalation) {
    Verdict v = verdict(Outcome::escalated_to_d, "seller reports a different response", 1);
    v.escalated = true;
    return v;
  }

  std::optional<DlEqProof> proof;
  try {
    proof = seller.prove_step(s.q, mine->m_out, s.power);
  } catch (const Error& e) {
    if (!unresponsive(e)) throw;
    Verdict v = verdict(Outcome::seller_at_fault, "seller did not prove its response", 1);
    v.escalated = true;
    return v;
  }
  bool honest = dleq_verify(*proof, s.q, mine->m_out, catalog.params.generator(), kt,
                            catalog.params) &&
                verify_step_signature(catalog.verify_pk, s.q, mine->m_out, mine->step_signature);
  Verdict v;
  if (honest) {
    v = verdict(Outcome::buyer_claim_rejected,
                "seller proved a different response; buyer's value is not the seller's", 1);
    v.forwarded_response = mine->m_out;
    v.forwarded_signature = mine->step_signature;
  } else {
    v = verdict(Outcome::seller_must_resign,
                "seller could not prove its response; must sign the buyer's values", 1);
  }
  v.escalated = true;
  return v;
}

Verdict resolve_type_d_method1(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               SellerResponder& seller) {
  if (auto v = check_step_signatures(steps, catalog)) return *v;
  const GroupParams& params = catalog.params;
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const DisputeStep& s = steps[k];
    std::optional<DlEqProof> proof;
    try {
      proof = seller.prove_step(s.q, s.n, s.power);
    } catch (const Error& e) {
      if (!unresponsive(e)) throw;
      return verdict(Outcome::seller_at_fault, "seller did not answer for " + step_label(k), k,
                     k + 1);
    }
    if (!dleq_verify(*proof, s.q, s.n, params.generator(), catalog.k(s.power), params)) {
      return verdict(Outcome::seller_at_fault,
                     step_label(k) + ": proof against K_" + std::to_string(s.power) + " rejected",
                     k, k + 1);
    }
  }
  return verdict(Outcome::buyer_claim_rejected, "seller is honest: every step proof verifies",
                 steps.size());
}

Verdict resolve_type_d_method2(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               SellerResponder& seller, Rng& rng) {
  if (auto v = check_step_signatures(steps, catalog)) return *v;
  const GroupParams& params = catalog.params;
  std::uint64_t longest = 0;
  for (const auto& s : steps) longest = std::max(longest, s.power);
  std::vector<const LicenseEntry*> eligible;
  for (const auto& l : catalog.licenses) {
    if (l.price >= longest) eligible.push_back(&l);
  }
  if (eligible.empty()) {
    throw Error(Errc::chain_length_mismatch,
                "no catalog license reaches power " + std::to_string(longest));
  }
  const LicenseEntry& audited = *eligible[rng.below(eligible.size()).get_ui()];

  ChainReveal reveal;
  try {
    reveal = seller.reveal_chain(audited.license_id, steps);
  } catch (const Error& e) {
    if (!unresponsive(e)) throw;
    return verdict(Outcome::seller_at_fault, "seller did not reveal the key chain", 0);
  }
  if (reveal.chain.size() != audited.price || reveal.link_proofs.size() != audited.price ||
      reveal.step_proofs.size() != steps.size()) {
    return verdict(Outcome::seller_at_fault,
                   "chain-length-mismatch for license " + audited.license_id, 0);
  }
  for (const auto& c : reveal.chain) {
    if (!params.contains(c.value())) {
      return verdict(Outcome::seller_at_fault, "revealed chain leaves the group", 0);
    }
  }
  try {
    decrypt_license(reveal.chain.back(), audited.encrypted_license);
  } catch (const Error&) {
    return verdict(Outcome::seller_at_fault,
                   "revealed key does not decrypt license " + audited.license_id, 0);
  }
  const GroupElement& k1 = catalog.k(1);
  for (std::size_t j = 0; j < reveal.chain.size(); ++j) {
    const GroupElement& prev = j == 0 ? audited.x : reveal.chain[j - 1];
    if (!dleq_verify(reveal.link_proofs[j], prev, reveal.chain[j], params.generator(), k1,
                     params)) {
      return verdict(Outcome::seller_at_fault,
                     "chain link " + std::to_string(j + 1) + " of license " + audited.license_id +
                         " rejected",
                     0);
    }
  }
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const DisputeStep& s = steps[k];
    if (!dleq_verify(reveal.step_proofs[k], s.q, s.n, audited.x, reveal.chain[s.power - 1],
                     params)) {
      return verdict(Outcome::seller_at_fault,
                     step_label(k) + ": proof against license " + audited.license_id +
                         " rejected",
                     k, k + 1);
    }
  }
  return verdict(Outcome::buyer_claim_rejected,
                 "seller is honest: chain of license " + audited.license_id +
                     " and every step proof verify",
                 steps.size());
}

Verdict resolve_type_d_method3(const std::vector<DisputeStep>& steps, const Catalog& catalog,
                               const Exponent& s_revealed) {
  if (auto v = check_step_signatures(steps, catalog)) return *v;
  const GroupParams& params = catalog.params;
  if (!(pow_mod(params.generator(), s_revealed, params) == catalog.k(1))) {
    return verdict(Outcome::seller_at_fault, "commitment-mismatch: g^s differs from K_1", 0);
  }
  for (std::size_t k = 0; k < steps.size(); ++k) {
    const DisputeStep& s = steps[k];
    if (!(pow_mod(s.q, exp_pow(s_revealed, s.power, params), params) == s.n)) {
      return verdict(Outcome::seller_at_fault, step_label(k) + ": response is not Q^(s^t)", k,
                     k + 1);
    }
  }
  return verdict(Outcome::buyer_claim_rejected, "seller is honest: every response recomputes",
                 steps.size());
}

Verdict arbitrate(const DisputeCase& c, const Catalog& catalog, SellerResponder& seller,
                  Rng& rng) {
  if (c.catalog_digest != catalog_digest(catalog)) {
    throw Error(Errc::malformed_evidence, "case refers to a different catalog");
  }
  switch (c.kind) {
    case DisputeKind::b: return resolve_type_b(c, catalog);
    case DisputeKind::c: return resolve_type_c(c, catalog, seller);
    case DisputeKind::d: break;
  }
  switch (c.method) {
    case DMethod::proof: return resolve_type_d_method1(c.steps, catalog, seller);
    case DMethod::chain: return resolve_type_d_method2(c.steps, catalog, seller, rng);
    case DMethod::reveal: break;
  }
  Exponent s = Exponent::trusted(0);
  try {
    s = seller.reveal_secret();
  } catch (const Error& e) {
    if (!unresponsive(e)) throw;
    return verdict(Outcome::seller_at_fault, "seller did not reveal s", 0);
  }
  return resolve_type_d_method3(c.steps, catalog, s);
}

}  // namespace blinddrm
