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

#include "blinddrm/errors.hpp"
#include "blinddrm/report.hpp"
#include "blinddrm/scenario.hpp"

using namespace blinddrm;

namespace {

Scenario make(Mode mode, std::uint64_t price, std::vector<Fault> faults = {}) {
  Scenario sc;
  sc.mode = mode;
  sc.price = price;
  sc.seed = 17;
  sc.faults = std::move(faults);
  return sc;
}

Errc code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::invalid_argument;
}

}  // namespace

TEST(Scenario, TextFormInAnyOrder) {
  Scenario sc = Scenario::parse(
      "fault: wrong-s@2\nprice: 13\nmode: enhanced\nrefresh: 0\ntransport: socket\n"
      "dispute_methods: 1,3\nseed: 9\n");
  EXPECT_EQ(sc.mode, Mode::enhanced);
  EXPECT_EQ(sc.price, 13u);
  EXPECT_FALSE(sc.refresh_blinding);
  EXPECT_EQ(sc.transport, TransportKind::socket);
  EXPECT_EQ(sc.faults, (std::vector<Fault>{{FaultKind::wrong_s, 2}}));
  EXPECT_EQ(sc.dispute_methods, (std::vector<DMethod>{DMethod::proof, DMethod::reveal}));
  EXPECT_EQ(sc.card_plan(), CardPlan::matched);
  Scenario back = Scenario::parse(sc.serialize());
  EXPECT_EQ(back.serialize(), sc.serialize());
  EXPECT_EQ(Scenario::parse("price: 2\n").card_plan(), CardPlan::unit);
}

TEST(Scenario, InvalidFilesAreRejected) {
  for (const char* text : {
           "price: 0\n",
           "price: 5000\n",
           "price: x\n",
           "mode: turbo\n",
           "price: 3\nprice: 4\n",
           "color: red\n",
           "price: 3\nfault: wrong-s@4\n",           // only three steps
           "price: 3\nfault: double-spend@1\n",      // nothing earlier to replay
           "price: 3\nfault: wrong-terms@1\n",
           "price: 3\nfault: corrupt-signature\n",
           "price: 3\nfault: gremlins@1\n",
           "group_bits: 4\n",
           "dispute_methods: 4\n",
           "refresh: 2\n",
           "no separator\n",
       }) {
    EXPECT_EQ(code_of([&] { Scenario::parse(text); }), Errc::scenario_invalid) << text;
  }
}

TEST(Scenario, HonestRunSucceedsOnBothTransports) {
  for (TransportKind t : {TransportKind::memory, TransportKind::socket}) {
    Scenario sc = make(Mode::enhanced, 11);
    sc.transport = t;
    ScenarioResult r = run_scenario(sc);
    EXPECT_EQ(r.status, RunStatus::completed);
    EXPECT_TRUE(r.key_correct);
    EXPECT_TRUE(r.license_decrypted);
    EXPECT_TRUE(r.conservation);
    EXPECT_EQ(r.seller_balance, 11u);
    EXPECT_EQ(r.plan, (std::vector<std::uint64_t>{8, 2, 1}));
    EXPECT_EQ(r.exit_code(), 0);
  }
}

TEST(Scenario, TransportDoesNotChangeTheCounts) {
  Scenario mem = make(Mode::basic, 6);
  Scenario sock = mem;
  sock.transport = TransportKind::socket;
  ScenarioResult a = run_scenario(mem), b = run_scenario(sock);
  for (const auto& actor : actor_names()) EXPECT_EQ(a.metrics[actor], b.metrics[actor]) << actor;
}

TEST(Scenario, ReportsAreDeterministic) {
  Scenario sc = make(Mode::enhanced, 9, {{FaultKind::wrong_s, 2}});
  EXPECT_EQ(run_scenario(sc).report, run_scenario(sc).report);
  Scenario other = sc;
  other.seed = 18;
  EXPECT_NE(run_scenario(other).report, run_scenario(sc).report);
}

TEST(Scenario, MetricsCrossCheck) {
  for (Mode mode : {Mode::basic, Mode::enhanced}) {
    for (std::uint64_t p : {3u, 8u, 13u}) {
      Scenario sc = make(mode, p);
      ScenarioResult r = run_scenario(sc);
      const Metrics& buyer = r.metrics["buyer"];
      const Metrics& seller = r.metrics["seller"];
      const Metrics& bank = r.metrics["bank"];
      const std::uint64_t steps = r.plan.size();
      std::uint64_t cards = 0;
      for (auto t : r.plan) cards += sc.card_plan() == CardPlan::unit ? t : 1;
      EXPECT_EQ(buyer.messages_sent, steps);
      EXPECT_EQ(seller.messages_sent, steps);
      EXPECT_EQ(seller.signings, steps);
      EXPECT_EQ(seller.exponentiations, steps);
      EXPECT_EQ(buyer.verifications, steps);
      EXPECT_EQ(buyer.divisions, steps);
      EXPECT_EQ(buyer.step_payload_bits, cards * 128 + steps * sc.group_bits);
      EXPECT_EQ(seller.step_payload_bits, steps * 2 * sc.group_bits);
      EXPECT_EQ(bank.messages_sent, steps);  // one SPEND_OK per step
      EXPECT_EQ(r.metrics["arbitrator"], Metrics{});
      EXPECT_EQ(r.cards_spent_value, p);
    }
  }
}

TEST(Scenario, FaultOutcomes) {
  {
    ScenarioResult r = run_scenario(make(Mode::basic, 4, {{FaultKind::wrong_terms, 0}}));
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].second.outcome, Outcome::seller_at_fault);
    EXPECT_EQ(r.exit_code(), 3);
  }
  {
    ScenarioResult r = run_scenario(make(Mode::enhanced, 7, {{FaultKind::corrupt_signature, 2}}));
    ASSERT_EQ(r.verdicts.size(), 1u);
    EXPECT_EQ(r.verdicts[0].second.outcome, Outcome::seller_must_resign);
    EXPECT_TRUE(r.purchase_complete);
    EXPECT_TRUE(r.key_correct);
  }
  {
    ScenarioResult r = run_scenario(make(Mode::basic, 5, {{FaultKind::wrong_s, 3}}));
    ASSERT_EQ(r.verdicts.size(), 3u);
    for (const auto& [label, v] : r.verdicts) {
      EXPECT_EQ(v.outcome, Outcome::seller_at_fault) << label;
      EXPECT_EQ(v.failing_step, 3u) << label;
    }
    EXPECT_FALSE(r.license_decrypted);
  }
  {
    ScenarioResult r = run_scenario(make(Mode::basic, 5, {{FaultKind::double_spend, 3}}));
    EXPECT_EQ(r.status, RunStatus::protocol_failure);
    EXPECT_EQ(r.exit_code(), 1);
    ASSERT_TRUE(r.replayed_step_seller.has_value());
    EXPECT_EQ(r.replayed_step_seller->exponentiations, 0u);
    EXPECT_EQ(r.seller_balance, 2u);
    EXPECT_TRUE(r.conservation);
  }
  {
    Scenario sc = make(Mode::enhanced, 6);
    sc.force_dispute = true;
    ScenarioResult r = run_scenario(sc);
    ASSERT_EQ(r.verdicts.size(), 3u);
    for (const auto& [label, v] : r.verdicts) EXPECT_EQ(v.outcome, Outcome::buyer_claim_rejected);
  }
}

TEST(Scenario, MetricsTsvLayout) {
  Scenario sc = make(Mode::basic, 2);
  sc.refresh_blinding = false;
  ScenarioResult r = run_scenario(sc);
  std::string tsv = metrics_tsv(r.metrics);
  EXPECT_NE(tsv.find("buyer\toperation_total\t4\n"), std::string::npos) << tsv;
  EXPECT_NE(tsv.find("seller\toperation_total\t4\n"), std::string::npos);
  EXPECT_EQ(std::count(tsv.begin(), tsv.end(), '\n'), 4 * 8);
}

TEST(Report, BasicTableMatchesClosedForm) {
  SweepOptions opt;
  opt.mode = Mode::basic;
  SweepResult r = report_tables(opt);
  EXPECT_TRUE(r.all_pass) << r.table;
  ASSERT_EQ(r.rows.size(), 6u);
  EXPECT_EQ(r.rows.back().buyer.operation_total(), 33u);
  EXPECT_EQ(r.rows.back().seller.operation_total(), 62u);
}

TEST(Report, EnhancedMessageCountIsPopcount) {
  SweepOptions opt;
  opt.mode = Mode::enhanced;
  opt.prices = {2, 3, 7, 16, 31};
  SweepResult r = report_tables(opt);
  EXPECT_TRUE(r.all_pass) << r.table;
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.buyer.messages_sent, static_cast<std::uint64_t>(std::popcount(row.price)));
  }
  EXPECT_EQ(ceil_log2(1), 0u);
  EXPECT_EQ(ceil_log2(2), 1u);
  EXPECT_EQ(ceil_log2(31), 5u);
  EXPECT_EQ(ceil_log2(32), 5u);
  EXPECT_EQ(ceil_log2(33), 6u);
}
