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

#include <gtest/gtest.h>

#include "blinddrm/dispute.hpp"
#include "blinddrm/errors.hpp"
#include "blinddrm/metrics.hpp"
#include "support.hpp"

using namespace blinddrm;
using blinddrm::testing::Market;
using blinddrm::testing::Offer;

namespace {

/// Seller that answers with s+1 on the listed steps (1-based, in the order
/// this channel sees them).
StepChannel cheating_channel(Market& m, std::set<std::size_t> bad_steps) {
  auto counter = std::make_shared<std::size_t>(0);
  auto wrong = std::make_shared<SellerKeys>(m.seller.keys);
  wrong->s = exp_add(wrong->s, Exponent(m.params, 1), m.params);
  return [&m, counter, wrong, bad_steps](const StepRequest& r) {
    ++*counter;
    const SellerKeys& keys = bad_steps.count(*counter) ? *wrong : m.seller.keys;
    return seller_handle_step(r, keys, m.bank, m.params, m.account);
  };
}

/// Runs every step; returns the session without decrypting.
PurchaseSession complete_steps(Market& m, const std::string& license, std::uint64_t price,
                               Mode mode, const StepChannel& channel, std::uint64_t seed = 1) {
  auto s = PurchaseSession::begin(m.catalog, license, m.matched_cards(price, mode), mode, true,
                                  Rng(seed));
  while (!s.complete()) s.process_response(channel(s.next_request()));
  return s;
}

class Unreachable : public SellerResponder {
 public:
  StepResponse recompute(const GroupElement&, std::uint64_t) override { fail(); }
  DlEqProof prove_step(const GroupElement&, const GroupElement&, std::uint64_t) override { fail(); }
  ChainReveal reveal_chain(const std::string&, const std::vector<DisputeStep>&) override { fail(); }
  Exponent reveal_secret() override { fail(); }

 private:
  [[noreturn]] static void fail() { throw Error(Errc::timeout, "no answer"); }
};

const DMethod kMethods[] = {DMethod::proof, DMethod::chain, DMethod::reveal};

class DisputeTest : public ::testing::Test {
 protected:
  Market m{gen_params(64, 31), {{"short", 2, ""}, {"main", 6, ""}, {"long", 9, ""}}, 5};
  KeyedSeller honest{m.seller.keys, *m.catalog, Rng(77)};
  Rng arb_rng{3};

  Verdict judge(const DisputeCase& c, SellerResponder& seller) {
    // Every case goes through its text form, as it would between processes.
    DisputeCase parsed = DisputeCase::parse(c.serialize(), m.params);
    EXPECT_EQ(parsed.serialize(), c.serialize());
    return arbitrate(parsed, *m.catalog, seller, arb_rng);
  }
  Verdict judge(const DisputeCase& c) { return judge(c, honest); }
};

}  // namespace

TEST_F(DisputeTest, WrongTermsFaultsTheSeller) {
  Market bad(m.params, {{"main", 5, "", "play; copy; resell"}}, 6);
  auto s = complete_steps(bad, "main", 5, Mode::enhanced, bad.channel());
  LicensePlaintext pt = s.finish();
  EXPECT_NE(pt.terms, s.entry().terms);
  DisputeCase c = make_type_b_case(s, pt);
  DisputeCase parsed = DisputeCase::parse(c.serialize(), bad.params);
  KeyedSeller seller(bad.seller.keys, *bad.catalog, Rng(1));
  Verdict v = arbitrate(parsed, *bad.catalog, seller, arb_rng);
  EXPECT_EQ(v.outcome, Outcome::seller_at_fault) << v.rationale;
  EXPECT_EQ(v.checked_steps, 2u);
}

TEST_F(DisputeTest, TypeBWithHonestTermsIsRejected) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  Verdict v = judge(make_type_b_case(s, s.finish()));
  EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected);
  EXPECT_NE(v.rationale.find("match"), std::string::npos);
}

TEST_F(DisputeTest, TypeBRejectsDoctoredEvidence) {
  Market bad(m.params, {{"main", 3, "", "play; copy"}}, 7);
  auto s = complete_steps(bad, "main", 3, Mode::basic, bad.channel());
  LicensePlaintext pt = s.finish();
  KeyedSeller seller(bad.seller.keys, *bad.catalog, Rng(1));
  DisputeCase good = make_type_b_case(s, pt);
  ASSERT_EQ(arbitrate(good, *bad.catalog, seller, arb_rng).outcome, Outcome::seller_at_fault);

  DisputeCase alpha = good;
  alpha.alphas[1] = exp_add(alpha.alphas[1], Exponent(bad.params, 1), bad.params);
  EXPECT_EQ(arbitrate(alpha, *bad.catalog, seller, arb_rng).outcome, Outcome::buyer_claim_rejected);

  DisputeCase claim = good;
  LicensePlaintext other = pt;
  other.terms = "anything";
  claim.plaintext = other.encode();
  EXPECT_EQ(arbitrate(claim, *bad.catalog, seller, arb_rng).outcome, Outcome::buyer_claim_rejected);

  DisputeCase dropped = good;
  dropped.steps.pop_back();
  dropped.alphas.pop_back();
  EXPECT_EQ(arbitrate(dropped, *bad.catalog, seller, arb_rng).outcome,
            Outcome::buyer_claim_rejected);

  DisputeCase unsigned_step = good;
  unsigned_step.steps[0].signature[3] ^= 1;
  Verdict v = arbitrate(unsigned_step, *bad.catalog, seller, arb_rng);
  EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected);
  EXPECT_EQ(v.failing_step, 1u);
}

TEST_F(DisputeTest, CorruptSignatureMakesSellerResign) {
  auto s = PurchaseSession::begin(m.catalog, "main", m.cards(6, 1), Mode::basic, true, Rng(2));
  s.process_response(m.channel()(s.next_request()));
  StepResponse resp = m.channel()(s.next_request());
  resp.step_signature.back() ^= 1;
  EXPECT_THROW(s.process_response(resp), Error);
  Verdict v = judge(make_type_c_case(s));
  EXPECT_EQ(v.outcome, Outcome::seller_must_resign);
  ASSERT_TRUE(v.forwarded_signature.has_value());
  // The forwarded signature completes the step.
  s.process_response({*v.forwarded_response, *v.forwarded_signature});
  while (!s.complete()) s.process_response(m.channel()(s.next_request()));
  EXPECT_EQ(s.acc().value(), m.expected_key("main", 6));
}

TEST_F(DisputeTest, TypeCWithValidSignatureIsRejected) {
  auto s = PurchaseSession::begin(m.catalog, "main", m.cards(6, 1), Mode::basic, true, Rng(2));
  StepRequest req = s.next_request();
  StepResponse resp = m.channel()(req);
  DisputeCase c;
  c.kind = DisputeKind::c;
  c.catalog_digest = catalog_digest(*m.catalog);
  c.steps.push_back({req.m, resp.m_out, 1, resp.step_signature});
  EXPECT_EQ(judge(c).outcome, Outcome::buyer_claim_rejected);
}

TEST_F(DisputeTest, TypeCValueConflictEscalates) {
  // Wrong s and a broken signature on the same step.
  auto cheat = cheating_channel(m, {1});
  auto s = PurchaseSession::begin(m.catalog, "main", m.cards(6, 1), Mode::basic, true, Rng(2));
  StepResponse resp = cheat(s.next_request());
  resp.step_signature[0] ^= 0x10;
  EXPECT_THROW(s.process_response(resp), Error);
  DisputeCase c = make_type_c_case(s);
  Verdict stop = resolve_type_c(c, *m.catalog, honest, false);
  EXPECT_EQ(stop.outcome, Outcome::escalated_to_d);
  EXPECT_TRUE(stop.escalated);
  // Followed through, the seller proves the correct value, which then
  // completes the step.
  Verdict v = resolve_type_c(c, *m.catalog, honest, true);
  EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected);
  ASSERT_TRUE(v.forwarded_response.has_value());
  s.process_response({*v.forwarded_response, *v.forwarded_signature});
  EXPECT_EQ(s.steps_done(), 1u);
}

TEST_F(DisputeTest, UnresponsiveSellerLosesTypeC) {
  auto s = PurchaseSession::begin(m.catalog, "main", m.cards(6, 1), Mode::basic, true, Rng(2));
  StepResponse resp = m.channel()(s.next_request());
  resp.step_signature[0] ^= 0x10;
  EXPECT_THROW(s.process_response(resp), Error);
  Unreachable gone;
  EXPECT_EQ(judge(make_type_c_case(s), gone).outcome, Outcome::seller_at_fault);
}

TEST_F(DisputeTest, WrongSFaultsTheSellerUnderEveryMethod) {
  for (Mode mode : {Mode::basic, Mode::enhanced}) {
    for (std::size_t bad_step : {1u, 2u}) {
      auto s = complete_steps(m, "main", 6, mode, cheating_channel(m, {bad_step}));
      EXPECT_THROW(s.finish(), Error);
      for (DMethod method : kMethods) {
        Verdict v = judge(make_type_d_case(s, method));
        EXPECT_EQ(v.outcome, Outcome::seller_at_fault)
            << mode_name(mode) << " method " << int(method) << ": " << v.rationale;
        EXPECT_EQ(v.failing_step, bad_step);
      }
    }
  }
}

TEST_F(DisputeTest, HonestSellerIsClearedUnderEveryMethod) {
  for (Mode mode : {Mode::basic, Mode::enhanced}) {
    auto s = complete_steps(m, "main", 6, mode, m.channel());
    for (DMethod method : kMethods) {
      Verdict v = judge(make_type_d_case(s, method));
      EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected) << int(method) << ": " << v.rationale;
      EXPECT_EQ(v.checked_steps, s.plan().size());
    }
  }
}

TEST_F(DisputeTest, UnresponsiveSellerLosesTypeD) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  Unreachable gone;
  for (DMethod method : kMethods) {
    EXPECT_EQ(judge(make_type_d_case(s, method), gone).outcome, Outcome::seller_at_fault);
  }
}

TEST_F(DisputeTest, EveryFlippedSignatureBitVoidsTheEvidence) {
  auto s = complete_steps(m, "main", 6, Mode::enhanced, m.channel());
  DisputeCase base = make_type_d_case(s, DMethod::proof);
  for (std::size_t k = 0; k < base.steps.size(); ++k) {
    for (std::size_t bit = 0; bit < base.steps[k].signature.size() * 8; ++bit) {
      DisputeCase c = base;
      c.steps[k].signature[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
      Verdict v = arbitrate(c, *m.catalog, honest, arb_rng);
      ASSERT_EQ(v.outcome, Outcome::buyer_claim_rejected) << k << "/" << bit;
      ASSERT_EQ(v.failing_step, k + 1);
    }
  }
}

TEST_F(DisputeTest, ForgedStepsAreCaught) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  Rng forge(11);
  for (int i = 0; i < 30; ++i) {
    DisputeCase c = make_type_d_case(s, kMethods[i % 3]);
    std::size_t k = forge.below(c.steps.size()).get_ui();
    // A different response with the real signature: the signature binds it.
    c.steps[k].n = pow_mod(m.params.generator(), Exponent::random_nonzero(m.params, forge), m.params);
    Verdict v = arbitrate(c, *m.catalog, honest, arb_rng);
    EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected);
    EXPECT_EQ(v.failing_step, k + 1);
  }
  // Steps lifted from another purchase still verify: they are genuine.
  auto other = complete_steps(m, "long", 9, Mode::basic, m.channel(), 9);
  DisputeCase mixed = make_type_d_case(s, DMethod::proof);
  mixed.steps[0] = make_type_d_case(other, DMethod::proof).steps[3];
  EXPECT_EQ(arbitrate(mixed, *m.catalog, honest, arb_rng).outcome, Outcome::buyer_claim_rejected);
}

TEST_F(DisputeTest, CaseFilesCarryNoIdentifyingData) {
  auto s = complete_steps(m, "main", 6, Mode::basic, cheating_channel(m, {2}));
  std::vector<std::string> secrets;
  for (const auto& cards : s.transcripts()) {
    for (const auto& id : cards.card_ids) secrets.push_back(id);
  }
  for (const auto& a : s.step_alphas()) secrets.push_back(to_hex(a.value()));
  secrets.push_back(to_hex(m.catalog->license("main").x.value()));
  secrets.push_back(to_hex(s.acc().value()));
  secrets.push_back("main");
  ASSERT_FALSE(s.transcripts().front().card_ids.empty());
  for (DMethod method : kMethods) {
    std::string text = make_type_d_case(s, method).serialize();
    for (const auto& secret : secrets) {
      EXPECT_EQ(text.find(secret), std::string::npos) << secret << " leaked into\n" << text;
    }
  }
}

TEST_F(DisputeTest, WrongCatalogIsRefused) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  DisputeCase c = make_type_d_case(s, DMethod::proof);
  c.catalog_digest[0] = c.catalog_digest[0] == 'a' ? 'b' : 'a';
  try {
    arbitrate(c, *m.catalog, honest, arb_rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::malformed_evidence);
  }
}

TEST_F(DisputeTest, ChainAuditNeedsALongEnoughLicense) {
  Market small(m.params, {{"a", 2, ""}, {"b", 4, ""}}, 8);
  auto s = complete_steps(small, "b", 4, Mode::basic, small.channel());
  KeyedSeller seller(small.seller.keys, *small.catalog, Rng(1));
  // Four unit steps are covered by b alone.
  EXPECT_EQ(resolve_type_d_method2(make_type_d_case(s, DMethod::chain).steps, *small.catalog,
                                   seller, arb_rng)
                .outcome,
            Outcome::buyer_claim_rejected);
  std::vector<DisputeStep> steps = make_type_d_case(s, DMethod::chain).steps;
  steps[0].power = 8;  // no license reaches power 8
  try {
    resolve_type_d_method2(steps, *small.catalog, seller, arb_rng);
    FAIL();
  } catch (const Error& e) {
    EXPECT_TRUE(e.code() == Errc::chain_length_mismatch || e.code() == Errc::missing_k_power);
  }
}

TEST_F(DisputeTest, RevealedWrongSecretIsCaught) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  Exponent lie = exp_add(m.seller.keys.s, Exponent(m.params, 1), m.params);
  Verdict v = resolve_type_d_method3(make_type_d_case(s, DMethod::reveal).steps, *m.catalog, lie);
  EXPECT_EQ(v.outcome, Outcome::seller_at_fault);
  EXPECT_NE(v.rationale.find("commitment-mismatch"), std::string::npos);
}

TEST_F(DisputeTest, ArbitrationIsDeterministicAndStateless) {
  auto s = complete_steps(m, "main", 6, Mode::enhanced, cheating_channel(m, {2}));
  DisputeCase c = make_type_d_case(s, DMethod::chain);
  auto run = [&] {
    KeyedSeller seller(m.seller.keys, *m.catalog, Rng(5));
    Rng rng(6);
    return arbitrate(c, *m.catalog, seller, rng).report();
  };
  EXPECT_EQ(run(), run());
  // Recomputing a step does not depend on anything the seller saw before.
  StepResponse a = honest.recompute(c.steps[1].q, c.steps[1].power);
  honest.recompute(c.steps[0].q, c.steps[0].power);
  StepResponse b = honest.recompute(c.steps[1].q, c.steps[1].power);
  EXPECT_EQ(a.m_out, b.m_out);
}

TEST_F(DisputeTest, AbandonedPurchaseHasNothingToDispute) {
  // A seller cannot claim non-payment: each step is paid before it is
  // answered, and an unfinished purchase gives the buyer nothing.
  auto s = PurchaseSession::begin(m.catalog, "main", m.cards(6, 1), Mode::basic, true, Rng(2));
  s.process_response(m.channel()(s.next_request()));
  s.process_response(m.channel()(s.next_request()));
  try {
    s.finish();
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::incomplete_session);
  }
  EXPECT_THROW(decrypt_license(s.acc(), s.entry().encrypted_license), Error);
  EXPECT_EQ(m.ledger.balance("seller"), 2u);
}

TEST_F(DisputeTest, CaseParserRejectsDamage) {
  auto s = complete_steps(m, "main", 6, Mode::basic, m.channel());
  std::string text = make_type_d_case(s, DMethod::proof).serialize();
  EXPECT_THROW(DisputeCase::parse(text.substr(0, text.size() - 5), m.params), Error);
  EXPECT_THROW(DisputeCase::parse("blinddrm-dispute: 1\nkind: A\n", m.params), Error);
  std::string bad_method = text;
  bad_method.replace(bad_method.find("method: 1"), 9, "method: 4");
  EXPECT_THROW(DisputeCase::parse(bad_method, m.params), Error);
  std::string bad_elem = text;
  auto pos = bad_elem.find("step.q: ");
  bad_elem.replace(pos + 8, bad_elem.find('\n', pos) - pos - 8, to_hex(m.params.modulus() - 1));
  EXPECT_THROW(DisputeCase::parse(bad_elem, m.params), Error);
}
