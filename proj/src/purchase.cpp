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

#include "blinddrm/purchase.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "blinddrm/errors.hpp"
#include "blinddrm/kvtext.hpp"

namespace blinddrm {

const char* mode_name(Mode mode) { return mode == Mode::basic ? "basic" : "enhanced"; }

Mode parse_mode(std::string_view name) {
  if (name == "basic") return Mode::basic;
  if (name == "enhanced") return Mode::enhanced;
  throw Error(Errc::invalid_argument, "unknown mode '" + std::string(name) + "'");
}

std::vector<std::uint64_t> plan_steps(std::uint64_t price, const std::set<std::uint64_t>& powers) {
  if (price == 0) throw Error(Errc::invalid_argument, "price must be positive");
  if (!powers.count(1)) throw Error(Errc::missing_k_power, "K_1 is required to plan a purchase");
  std::vector<std::uint64_t> plan;
  std::uint64_t left = price;
  for (auto it = powers.rbegin(); it != powers.rend() && left > 0; ++it) {
    while (*it > 0 && left >= *it) {
      plan.push_back(*it);
      left -= *it;
    }
  }
  return plan;
}

Bytes step_signature_payload(const GroupElement& m, const GroupElement& m_out) {
  ByteWriter w;
  w.text("blinddrm/step/v1");
  m.encode_to(w);
  m_out.encode_to(w);
  return w.take();
}

bool verify_step_signature(const VerifyKey& pk, const GroupElement& m, const GroupElement& m_out,
                           ByteView signature) {
  return verify(pk, step_signature_payload(m, m_out), signature);
}

PurchaseSession::PurchaseSession(std::shared_ptr<const Catalog> catalog, std::string license_id,
                                 GroupElement start_key, std::uint64_t start_level,
                                 std::uint64_t remaining, bool refresh, Rng rng)
    : catalog_(std::move(catalog)),
      license_id_(std::move(license_id)),
      refresh_(refresh),
      rng_(std::move(rng)),
      alpha_(Exponent::random(catalog_->params, rng_)),
      r_(pow_mod(catalog_->params.generator(), alpha_, catalog_->params)),
      start_key_(start_key),
      start_level_(start_level),
      acc_(std::move(start_key)),
      remaining_(remaining) {}

PurchaseSession PurchaseSession::begin(std::shared_ptr<const Catalog> catalog,
                                       std::string license_id, std::vector<CardRef> cards,
                                       Mode mode, bool refresh_blinding, Rng rng) {
  const LicenseEntry& entry = catalog->license(license_id);
  GroupElement x = entry.x;
  std::uint64_t price = entry.price;
  PurchaseSession s(std::move(catalog), std::move(license_id), std::move(x), 0, price,
                    refresh_blinding, std::move(rng));
  s.plan_and_assign(std::move(cards), mode);
  return s;
}

PurchaseSession PurchaseSession::upgrade_from(std::shared_ptr<const Catalog> catalog,
                                              std::string_view from_license_id,
                                              const GroupElement& key, std::string to_license_id,
                                              std::vector<CardRef> cards, Mode mode,
                                              bool refresh_blinding, Rng rng) {
  const LicenseEntry& from = catalog->license(from_license_id);
  const LicenseEntry& to = catalog->license(to_license_id);
  if (!(from.x == to.x)) {
    throw Error(Errc::mismatched_factor, "licenses '" + from.license_id + "' and '" +
                                             to.license_id + "' do not share x");
  }
  if (to.price <= from.price) {
    throw Error(Errc::nothing_to_upgrade, "target price " + std::to_string(to.price) +
                                              " does not exceed " + std::to_string(from.price));
  }
  if (!catalog->params.contains(key.value())) {
    throw Error(Errc::malformed_element, "upgrade key outside the group");
  }
  std::uint64_t level = from.price;
  std::uint64_t remaining = to.price - from.price;
  PurchaseSession s(std::move(catalog), std::move(to_license_id), key, level, remaining,
                    refresh_blinding, std::move(rng));
  s.plan_and_assign(std::move(cards), mode);
  return s;
}

void PurchaseSession::plan_and_assign(std::vector<CardRef> cards, Mode mode) {
  std::set<std::uint64_t> powers = mode == Mode::basic ? std::set<std::uint64_t>{1}
                                                       : catalog_->powers();
  plan_ = plan_steps(remaining_, powers);
  std::uint64_t total = 0;
  for (const auto& c : cards) {
    if (c.value == 0) throw Error(Errc::invalid_argument, "card " + c.card_id + " has no value");
    total += c.value;
  }
  if (total < remaining_) {
    throw Error(Errc::insufficient_funds, "cards total " + std::to_string(total) + ", need " +
                                              std::to_string(remaining_));
  }
  std::stable_sort(cards.begin(), cards.end(),
                   [](const CardRef& a, const CardRef& b) { return a.value > b.value; });
  std::vector<bool> used(cards.size(), false);
  step_cards_.clear();
  for (std::uint64_t t : plan_) {
    std::uint64_t need = t;
    std::vector<CardRef> chosen;
    for (std::size_t i = 0; i < cards.size() && need > 0; ++i) {
      if (!used[i] && cards[i].value <= need) {
        used[i] = true;
        need -= cards[i].value;
        chosen.push_back(cards[i]);
      }
    }
    if (need != 0) {
      throw Error(Errc::insufficient_funds,
                  "cards cannot pay a " + std::to_string(t) + "-unit step exactly");
    }
    step_cards_.push_back(std::move(chosen));
  }
  for (std::uint64_t t : plan_) unblinder(t);
}

void PurchaseSession::new_blinding() {
  alpha_ = Exponent::random(catalog_->params, rng_);
  r_ = pow_mod(catalog_->params.generator(), alpha_, catalog_->params);
  unblinders_.clear();
}

const GroupElement& PurchaseSession::unblinder(std::uint64_t power) {
  auto it = unblinders_.find(power);
  if (it == unblinders_.end()) {
    it = unblinders_.emplace(power, pow_mod(catalog_->k(power), alpha_, catalog_->params)).first;
  }
  return it->second;
}

StepRequest PurchaseSession::next_request() {
  if (remaining_ == 0) throw Error(Errc::session_complete, "nothing left to pay");
  if (outstanding_) return *outstanding_;
  if (refresh_ && next_step_ > 0) new_blinding();
  std::vector<std::string> ids;
  for (const auto& c : step_cards_[next_step_]) ids.push_back(c.card_id);
  outstanding_ = StepRequest{std::move(ids), mul(r_, acc_, catalog_->params)};
  return *outstanding_;
}

void PurchaseSession::process_response(const StepResponse& response) {
  if (!outstanding_) throw Error(Errc::invalid_argument, "no request outstanding");
  const GroupParams& params = catalog_->params;
  if (!params.contains(response.m_out.value())) {
    throw Error(Errc::malformed_element, "response outside the group");
  }
  const std::uint64_t t = plan_[next_step_];
  if (!verify_step_signature(catalog_->verify_pk, outstanding_->m, response.m_out,
                             response.step_signature)) {
    rejected_ = Rejected{*outstanding_, response, t};
    throw Error(Errc::bad_signature, "step " + std::to_string(next_step_ + 1) +
                                         " signature does not verify");
  }
  acc_ = div_mod(response.m_out, unblinder(t), params);
  transcripts_.push_back({outstanding_->m, response.m_out, t, response.step_signature,
                          outstanding_->card_ids});
  step_alphas_.push_back(alpha_);
  remaining_ -= t;
  ++next_step_;
  outstanding_.reset();
  rejected_.reset();
}

LicensePlaintext PurchaseSession::finish() const {
  if (remaining_ != 0) {
    throw Error(Errc::incomplete_session, std::to_string(remaining_) + " units still unpaid");
  }
  return decrypt_license(acc_, entry().encrypted_license);
}

namespace {

std::string join_cards(const std::vector<CardRef>& cards) {
  std::string out;
  for (const auto& c : cards) {
    if (!out.empty()) out += ' ';
    out += c.card_id + ":" + std::to_string(c.value);
  }
  return out;
}

std::string join_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    if (!out.empty()) out += ' ';
    out += id;
  }
  return out;
}

std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

GroupElement element_field(KvReader& r, std::string_view key, const GroupParams& params) {
  std::string v = r.take(key);
  try {
    return GroupElement(params, from_hex(v));
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not a group element");
  }
}

std::uint64_t parse_card_value(KvReader& r, const std::string& digits) {
  if (digits.empty() || digits.size() > 19 ||
      digits.find_first_not_of("0123456789") != std::string::npos || digits[0] == '0') {
    r.fail("bad card value '" + digits + "'");
  }
  return std::stoull(digits);
}

}  // namespace

std::string PurchaseSession::checkpoint() const {
  KvWriter w;
  w.put("blinddrm-session", 1)
      .put("license", license_id_)
      .put("refresh", refresh_ ? 1 : 0)
      .put("alpha", to_hex(alpha_.value()))
      .put("start_key", to_hex(start_key_.value()))
      .put("start_level", start_level_)
      .put("acc", to_hex(acc_.value()))
      .put("remaining", remaining_)
      .put("next_step", next_step_);
  for (std::size_t i = 0; i < plan_.size(); ++i) {
    w.put("step.power", plan_[i]).put("step.cards", join_cards(step_cards_[i]));
  }
  for (std::size_t i = 0; i < transcripts_.size(); ++i) {
    const auto& t = transcripts_[i];
    w.put("transcript.q", to_hex(t.request.value()))
        .put("transcript.n", to_hex(t.response.value()))
        .put("transcript.t", t.power)
        .put("transcript.sig", base64_encode(t.step_signature))
        .put("transcript.cards", join_ids(t.card_ids))
        .put("transcript.alpha", to_hex(step_alphas_[i].value()));
  }
  if (outstanding_) w.put("outstanding.m", to_hex(outstanding_->m.value()));
  return w.str();
}

PurchaseSession PurchaseSession::restore(std::shared_ptr<const Catalog> catalog,
                                         std::string_view text, Rng rng) {
  KvReader r(text);
  if (r.take_u64("blinddrm-session") != 1) r.fail("unsupported session version");
  const GroupParams& params = catalog->params;
  std::string license_id = r.take("license");
  if (!catalog->find(license_id)) r.fail("license '" + license_id + "' not in catalog");
  bool refresh = r.take_u64("refresh") != 0;
  std::string alpha_hex = r.take("alpha");
  mpz_class alpha;
  try {
    alpha = from_hex(alpha_hex);
  } catch (const Error&) {
    r.fail("alpha is not a hex integer");
  }
  if (alpha >= params.order()) r.fail("alpha out of range");
  GroupElement start_key = element_field(r, "start_key", params);
  std::uint64_t start_level = r.take_u64("start_level");
  GroupElement acc = element_field(r, "acc", params);
  std::uint64_t remaining = r.take_u64("remaining");
  std::uint64_t next_step = r.take_u64("next_step");

  std::vector<std::uint64_t> plan;
  std::vector<std::vector<CardRef>> step_cards;
  while (r.peek("step.power")) {
    plan.push_back(r.take_u64("step.power"));
    std::vector<CardRef> cards;
    for (const auto& word : split_words(r.take("step.cards"))) {
      auto colon = word.find(':');
      if (colon == std::string::npos) r.fail("bad card entry '" + word + "'");
      cards.push_back({word.substr(0, colon), parse_card_value(r, word.substr(colon + 1))});
    }
    step_cards.push_back(std::move(cards));
  }
  std::uint64_t planned = std::accumulate(plan.begin(), plan.end(), std::uint64_t{0});
  if (next_step > plan.size()) r.fail("next_step beyond plan");
  std::uint64_t paid = std::accumulate(plan.begin(), plan.begin() + next_step, std::uint64_t{0});
  if (planned - paid != remaining) r.fail("plan does not match remaining units");

  for (std::size_t i = 0; i < plan.size(); ++i) {
    std::uint64_t sum = 0;
    for (const auto& c : step_cards[i]) sum += c.value;
    if (sum != plan[i] || !catalog->k_table.count(plan[i])) r.fail("step cards do not match plan");
  }

  PurchaseSession s(catalog, license_id, start_key, start_level, remaining, refresh,
                    std::move(rng));
  s.plan_ = std::move(plan);
  s.step_cards_ = std::move(step_cards);
  s.alpha_ = Exponent(params, alpha);
  s.r_ = pow_mod(params.generator(), s.alpha_, params);
  s.unblinders_.clear();
  s.acc_ = acc;
  s.next_step_ = next_step;

  while (r.peek("transcript.q")) {
    StepTranscript t{element_field(r, "transcript.q", params),
                     element_field(r, "transcript.n", params), r.take_u64("transcript.t"),
                     base64_decode(r.take("transcript.sig")),
                     split_words(r.take("transcript.cards"))};
    s.transcripts_.push_back(std::move(t));
    std::string a = r.take("transcript.alpha");
    try {
      s.step_alphas_.push_back(Exponent(params, from_hex(a)));
    } catch (const Error&) {
      r.fail("transcript alpha is not a hex integer");
    }
  }
  if (s.transcripts_.size() != next_step) r.fail("transcript count does not match progress");
  if (r.peek("outstanding.m")) {
    if (s.remaining_ == 0) r.fail("outstanding request on a complete session");
    GroupElement m = element_field(r, "outstanding.m", params);
    std::vector<std::string> ids;
    for (const auto& c : s.step_cards_[s.next_step_]) ids.push_back(c.card_id);
    s.outstanding_ = StepRequest{std::move(ids), std::move(m)};
  }
  r.expect_end();
  return s;
}

StepResponse seller_handle_step(const StepRequest& request, const SellerKeys& keys,
                                BankAccess& bank, const GroupParams& params,
                                const std::string& seller_account) {
  if (!params.contains(request.m.value())) {
    throw Error(Errc::malformed_element, "request outside the group");
  }
  if (request.card_ids.empty()) throw Error(Errc::invalid_argument, "request carries no cards");
  std::vector<SpendReceipt> receipts = bank.spend(request.card_ids, seller_account);
  std::uint64_t t = 0;
  for (const auto& rc : receipts) t += rc.value;
  GroupElement m_out = pow_mod(request.m, exp_pow(keys.s, t, params), params);
  Bytes sig = sign(keys.sign_sk, step_signature_payload(request.m, m_out));
  return {std::move(m_out), std::move(sig)};
}

LicensePlaintext run_purchase(PurchaseSession& session, const StepChannel& channel) {
  while (!session.complete()) {
    session.process_response(channel(session.next_request()));
  }
  return session.finish();
}

LicensePlaintext upgrade(std::shared_ptr<const Catalog> catalog, std::string_view from_license_id,
                         const GroupElement& key, std::string to_license_id,
                         std::vector<CardRef> cards, Mode mode, bool refresh_blinding, Rng rng,
                         const StepChannel& channel) {
  PurchaseSession session =
      PurchaseSession::upgrade_from(std::move(catalog), from_license_id, key,
                                    std::move(to_license_id), std::move(cards), mode,
                                    refresh_blinding, std::move(rng));
  return run_purchase(session, channel);
}

}  // namespace blinddrm
