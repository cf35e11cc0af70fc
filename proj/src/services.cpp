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

#include "blinddrm/services.hpp"

namespace blinddrm {

namespace {

msg::WireProof to_wire(const DlEqProof& p) {
  return {p.commitment_a.value(), p.commitment_b.value(), p.challenge.value(), p.response.value()};
}

// Proof fields are left unchecked here; dleq_verify rejects anything outside
// the group or unreduced.
DlEqProof from_wire(const msg::WireProof& p) {
  return {GroupElement::trusted(p.commitment_a), GroupElement::trusted(p.commitment_b),
          Exponent::trusted(p.challenge), Exponent::trusted(p.response)};
}

msg::WireStep to_wire(const DisputeStep& s) { return {s.q.value(), s.n.value(), s.power}; }

[[noreturn]] void raise(const msg::StepErr& e) { throw Error(e.code, "seller: " + e.message); }

[[noreturn]] void unexpected(const Message& m) {
  throw Error(Errc::malformed_message,
              std::string("unexpected reply ") + message_type_name(message_type(m)));
}

template <class T>
const T& expect(const Message& m) {
  if (const auto* v = std::get_if<T>(&m)) return *v;
  if (const auto* e = std::get_if<msg::StepErr>(&m)) raise(*e);
  unexpected(m);
}

}  // namespace

Message BankService::handle(const Message& request) {
  try {
    if (const auto* m = std::get_if<msg::CardIssue>(&request)) {
      if (m->count == 0 || m->value == 0) {
        return msg::SpendErr{Errc::invalid_argument, "", std::nullopt, "count and value must be positive"};
      }
      std::vector<PrepaidCard> cards = ledger_.issue_cards(m->count, m->value);
      std::vector<std::string> ids;
      msg::CardDistribute out{m->store_id, {}};
      for (const auto& c : cards) {
        ids.push_back(c.card_id);
        out.cards.push_back({c.card_id, c.value});
      }
      ledger_.distribute(ids, m->store_id);
      return out;
    }
    if (const auto* m = std::get_if<msg::CardSpend>(&request)) {
      msg::SpendOk out;
      for (const auto& rc : ledger_.spend_all(m->card_ids, m->seller_account)) {
        out.receipts.push_back({rc.card_id, rc.value, rc.sequence});
      }
      return out;
    }
  } catch (const SpendError& e) {
    return msg::SpendErr{e.code(), e.card_id(), e.prior_sequence(), e.what()};
  } catch (const Error& e) {
    return msg::SpendErr{e.code(), "", std::nullopt, e.what()};
  }
  return msg::SpendErr{Errc::unknown_type, "", std::nullopt,
                       std::string("bank does not handle ") + message_type_name(message_type(request))};
}

SellerService::SellerService(const SellerKeys& keys, const Catalog& catalog, BankAccess& bank,
                             std::string account, Rng rng, SellerFaults faults)
    : keys_(keys),
      catalog_(catalog),
      bank_(bank),
      account_(std::move(account)),
      faults_(faults),
      responder_(keys, catalog, std::move(rng)) {}

Message SellerService::handle_step(const msg::StepReq& req) {
  const GroupParams& params = catalog_.params;
  StepRequest request{req.card_ids, GroupElement(params, req.m)};
  if (!faults_.corrupt_signature_at && !faults_.wrong_s_at) {
    StepResponse resp = seller_handle_step(request, keys_, bank_, params, account_);
    return msg::StepResp{resp.m_out.value(), std::move(resp.step_signature)};
  }

  // Fault-injection path: number the executed steps so a fault can target one.
  std::lock_guard lock(mu_);
  std::size_t step = steps_ + 1;
  SellerKeys keys = keys_;
  if (faults_.wrong_s_at == step) {
    keys.s = exp_add(keys.s, Exponent::trusted(1), params);
  }
  StepResponse resp = seller_handle_step(request, keys, bank_, params, account_);
  steps_ = step;
  if (faults_.corrupt_signature_at == step && !resp.step_signature.empty()) {
    resp.step_signature.back() ^= 0x01;
  }
  return msg::StepResp{resp.m_out.value(), std::move(resp.step_signature)};
}

Message SellerService::handle(const Message& request) {
  const GroupParams& params = catalog_.params;
  try {
    if (const auto* m = std::get_if<msg::StepReq>(&request)) return handle_step(*m);
    if (std::holds_alternative<msg::CatalogGet>(request)) {
      return msg::CatalogText{catalog_.serialize()};
    }
    std::lock_guard lock(mu_);
    if (const auto* m = std::get_if<msg::DisputeValuesReq>(&request)) {
      StepResponse r = responder_.recompute(GroupElement(params, m->q), m->power);
      return msg::DisputeValues{r.m_out.value(), std::move(r.step_signature)};
    }
    if (const auto* m = std::get_if<msg::DisputeProofReq>(&request)) {
      DlEqProof p = responder_.prove_step(GroupElement(params, m->step.q),
                                          GroupElement(params, m->step.n), m->step.power);
      return msg::DisputeProof{to_wire(p)};
    }
    if (const auto* m = std::get_if<msg::DisputeKeyReq>(&request)) {
      std::vector<DisputeStep> steps;
      for (const auto& s : m->steps) {
        steps.push_back({GroupElement(params, s.q), GroupElement(params, s.n), s.power, {}});
      }
      ChainReveal reveal = responder_.reveal_chain(m->license_id, steps);
      msg::DisputeChain out;
      for (const auto& c : reveal.chain) out.chain.push_back(c.value());
      for (const auto& p : reveal.link_proofs) out.link_proofs.push_back(to_wire(p));
      for (const auto& p : reveal.step_proofs) out.step_proofs.push_back(to_wire(p));
      return out;
    }
    if (std::holds_alternative<msg::DisputeSecretReq>(request)) {
      return msg::DisputeSecret{responder_.reveal_secret().value()};
    }
  } catch (const Error& e) {
    return msg::StepErr{e.code(), e.what()};
  }
  return msg::StepErr{Errc::unknown_type,
                      std::string("seller does not handle ") + message_type_name(message_type(request))};
}

Message RemoteBank::round_trip(const Message& request) {
  std::lock_guard lock(mu_);
  MetricsScope scope(charge_to_);
  return call(conn_, request);
}

std::vector<SpendReceipt> RemoteBank::spend(std::span<const std::string> card_ids,
                                            const std::string& seller_account) {
  Message reply = round_trip(msg::CardSpend{seller_account, {card_ids.begin(), card_ids.end()}});
  if (const auto* e = std::get_if<msg::SpendErr>(&reply)) {
    if (!e->card_id.empty()) throw SpendError(e->code, e->card_id, e->prior_sequence);
    throw Error(e->code, "bank: " + e->message);
  }
  const auto& ok = expect<msg::SpendOk>(reply);
  std::vector<SpendReceipt> out;
  for (const auto& rc : ok.receipts) out.push_back({rc.card_id, seller_account, rc.value, rc.sequence});
  return out;
}

std::vector<CardRef> RemoteBank::issue(const std::string& store_id, std::uint32_t count,
                                       std::uint64_t value) {
  Message reply = round_trip(msg::CardIssue{store_id, count, value});
  if (const auto* e = std::get_if<msg::SpendErr>(&reply)) throw Error(e->code, "bank: " + e->message);
  const auto& dist = expect<msg::CardDistribute>(reply);
  std::vector<CardRef> out;
  for (const auto& c : dist.cards) out.push_back({c.card_id, c.value});
  return out;
}

StepResponse RemoteSeller::step(const StepRequest& request) {
  Message reply = call(conn_, msg::StepReq{request.card_ids, request.m.value()});
  const auto& r = expect<msg::StepResp>(reply);
  return {GroupElement(params_, r.m_out), r.signature};
}

StepResponse RemoteSeller::recompute(const GroupElement& q, std::uint64_t power) {
  Message reply = call(conn_, msg::DisputeValuesReq{q.value(), power});
  const auto& r = expect<msg::DisputeValues>(reply);
  return {GroupElement(params_, r.n), r.signature};
}

DlEqProof RemoteSeller::prove_step(const GroupElement& q, const GroupElement& n,
                                   std::uint64_t power) {
  Message reply = call(conn_, msg::DisputeProofReq{{q.value(), n.value(), power}});
  return from_wire(expect<msg::DisputeProof>(reply).proof);
}

ChainReveal RemoteSeller::reveal_chain(const std::string& license_id,
                                       const std::vector<DisputeStep>& steps) {
  msg::DisputeKeyReq req{license_id, {}};
  for (const auto& s : steps) req.steps.push_back(to_wire(s));
  Message reply = call(conn_, req);
  const auto& r = expect<msg::DisputeChain>(reply);
  ChainReveal out;
  // Chain values stay unchecked; the arbitrator tests membership itself.
  for (const auto& c : r.chain) out.chain.push_back(GroupElement::trusted(c));
  for (const auto& p : r.link_proofs) out.link_proofs.push_back(from_wire(p));
  for (const auto& p : r.step_proofs) out.step_proofs.push_back(from_wire(p));
  return out;
}

Exponent RemoteSeller::reveal_secret() {
  Message reply = call(conn_, msg::DisputeSecretReq{});
  return Exponent(params_, expect<msg::DisputeSecret>(reply).s);
}

Catalog fetch_catalog(Connection& conn) {
  Message reply = call(conn, msg::CatalogGet{});
  return Catalog::parse(expect<msg::CatalogText>(reply).text);
}

}  // namespace blinddrm
