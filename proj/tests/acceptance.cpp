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

// Acceptance run: one line per criterion, exit status 0 only if all pass.

#include <atomic>
#include <bit>
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "blinddrm/dispute.hpp"
#include "blinddrm/errors.hpp"
#include "blinddrm/report.hpp"
#include "blinddrm/scenario.hpp"
#include "golden.hpp"
#include "support.hpp"

using namespace blinddrm;
using namespace blinddrm::testing;

namespace {

struct Check {
  bool pass = true;
  std::string detail;
};

// Ledger conservation is part of criterion 5 and must hold after every
// scenario this binary runs.
bool g_conservation = true;
std::size_t g_scenarios = 0;

ScenarioResult run(const Scenario& sc) {
  ScenarioResult r = run_scenario(sc);
  ++g_scenarios;
  g_conservation = g_conservation && r.conservation;
  return r;
}

Check end_to_end() {
  auto start = std::chrono::steady_clock::now();
  std::size_t runs = 0, bad = 0;
  std::string first_bad;
  for (unsigned bits : {16u, 32u, 64u}) {
    GroupParams params = gen_params(bits, 500 + bits);
    for (std::uint64_t p = 1; p <= 16; ++p) {
      Market m(params, {{"lic", p, ""}}, 7000 + bits * 100 + p);
      for (Mode mode : {Mode::basic, Mode::enhanced}) {
        for (bool refresh : {true, false}) {
          ++runs;
          bool ok = false;
          try {
            auto s = PurchaseSession::begin(m.catalog, "lic", m.matched_cards(p, mode), mode,
                                            refresh, Rng(runs));
            LicensePlaintext pt = run_purchase(s, m.channel());
            ok = s.acc().value() == m.expected_key("lic", p) && pt.license_id == "lic";
          } catch (const Error&) {
          }
          if (!ok && first_bad.empty()) {
            first_bad = std::to_string(bits) + " bits p=" + std::to_string(p) + " " +
                        mode_name(mode) + (refresh ? " refresh" : "");
          }
          bad += !ok;
        }
      }
    }
  }
  double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ostringstream d;
  d << runs - bad << "/" << runs << " keys equal x^(s^p mod q) and decrypt, " << secs << " s";
  if (!first_bad.empty()) d << "; first failure " << first_bad;
  return {bad == 0 && secs < 30.0, d.str()};
}

SweepResult sweep(Mode mode) {
  SweepOptions opt;
  opt.mode = mode;
  return report_tables(opt);
}

Check basic_costs(const SweepResult& r) {
  Check o;
  std::ostringstream d;
  d << "p: buyer/seller ops";
  for (const auto& row : r.rows) {
    bool ok = row.buyer.operation_total() == row.price + 2 &&
              row.seller.operation_total() == 2 * row.price;
    o.pass = o.pass && ok;
    d << "  " << row.price << ": " << row.buyer.operation_total() << "/"
      << row.seller.operation_total() << (ok ? "" : " (want " + std::to_string(row.price + 2) + "/" +
                                                         std::to_string(2 * row.price) + ")");
  }
  o.detail = d.str();
  return o;
}

Check enhanced_costs(const SweepResult& r) {
  Check o;
  std::ostringstream d;
  d << "p: buyer ops <= 1+2log, msgs = popcount";
  for (const auto& row : r.rows) {
    std::uint64_t log = ceil_log2(row.price);
    std::uint64_t pop = static_cast<std::uint64_t>(std::popcount(row.price));
    bool ops_ok = row.buyer.operation_total() <= 1 + 2 * log;
    bool msg_ok = row.buyer.messages_sent == pop && pop <= log + 1;
    o.pass = o.pass && ops_ok && msg_ok;
    d << "  " << row.price << ": " << row.buyer.operation_total() << "<=" << 1 + 2 * log
      << (ops_ok ? "" : " FAIL") << ", " << row.buyer.messages_sent << "=" << pop
      << (msg_ok ? "" : " FAIL");
  }
  o.detail = d.str();
  return o;
}

Check payload_bits(const SweepResult& basic, const SweepResult& enhanced) {
  Check o;
  std::size_t checked = 0;
  std::ostringstream d;
  for (const SweepResult* r : {&basic, &enhanced}) {
    for (const auto& row : r->rows) {
      // Basic: L = p. Enhanced: L = popcount(p), one matched card per message.
      const std::uint64_t l = row.steps;
      bool ok = row.buyer.step_payload_bits == l * (kCardIdBits + 64) &&
                row.seller.step_payload_bits == 2 * l * 64;
      if (!ok) {
        d << (r == &basic ? "basic" : "enhanced") << " p=" << row.price << " buyer "
          << row.buyer.step_payload_bits << " seller " << row.seller.step_payload_bits << "; ";
      }
      o.pass = o.pass && ok;
      ++checked;
    }
  }
  o.detail = std::to_string(checked) + " sweep points exact at beta=128, gamma=64" +
             (o.pass ? "" : ": " + d.str());
  return o;
}

Check double_spend() {
  std::ostringstream d;
  bool pass = true;
  int winners_total = 0;
  for (int round = 0; round < 10; ++round) {
    CardLedger ledger(Rng(900 + round));
    auto cards = ledger.issue_cards(1, 1);
    std::vector<std::string> ids = {cards[0].card_id};
    ledger.distribute(ids, "store");
    std::atomic<int> ok{0};
    std::atomic<bool> go{false};
    std::vector<std::thread> threads;
    for (int t = 0; t < 64; ++t) {
      threads.emplace_back([&, t] {
        while (!go) std::this_thread::yield();
        try {
          ledger.verify_and_spend(ids[0], "seller-" + std::to_string(t));
          ++ok;
        } catch (const SpendError&) {
        }
      });
    }
    go = true;
    for (auto& t : threads) t.join();
    pass = pass && ok == 1 && ledger.conservation_holds();
    winners_total += ok;
  }
  d << "64-way spend: " << winners_total << " winner(s) over 10 rounds";

  std::uint64_t replay_exps = 1;
  bool aborted = true;
  for (Mode mode : {Mode::basic, Mode::enhanced}) {
    Scenario sc;
    sc.mode = mode;
    sc.price = 7;
    sc.seed = 31;
    sc.faults = {{FaultKind::double_spend, 2}};
    ScenarioResult r = run(sc);
    aborted = aborted && r.status == RunStatus::protocol_failure && !r.purchase_complete;
    replay_exps = r.replayed_step_seller ? r.replayed_step_seller->exponentiations : 1;
    pass = pass && aborted && replay_exps == 0;
  }
  d << "; replayed card aborts the step with " << replay_exps << " seller exponentiations";
  return {pass, d.str()};
}

Check blinding() {
  GroupParams p = toy_params();
  GroupElement g = p.generator();
  bool bijective = true;
  std::size_t factors = 0;
  for (long x = 2; x < 23; ++x) {
    if (!p.contains(x)) continue;
    ++factors;
    std::map<mpz_class, int> hits;
    for (long a = 0; a < 11; ++a) ++hits[mul(pow_mod(g, Exponent(p, a), p), GroupElement(p, x), p).value()];
    bijective = bijective && hits.size() == 11;
    for (auto [v, n] : hits) bijective = bijective && n == 1;
  }

  // Requests of a real session at q = 11, one per sample.
  Market m(p, {{"lic", 1, ""}}, 4242);
  std::map<mpz_class, long> counts;
  const long samples = 10000;
  Rng rng(99);
  for (long i = 0; i < samples; ++i) {
    auto s = PurchaseSession::begin(m.catalog, "lic", {{"00000000000000000000000000000000", 1}},
                                    Mode::basic, true, rng.fork(std::to_string(i)));
    ++counts[s.next_request().m.value()];
  }
  double expected = samples / 11.0, chi2 = 0;
  for (long v = 1; v < 23; ++v) {
    if (!p.contains(v)) continue;
    double diff = counts[v] - expected;
    chi2 += diff * diff / expected;
  }
  const double critical = 23.209;  // chi-square, 10 degrees of freedom, 0.01
  std::ostringstream d;
  d << "every request reachable by exactly one alpha for " << factors
    << " factors; chi2 = " << chi2 << " (< " << critical << ") over " << samples << " requests";
  return {bijective && factors == 10 && chi2 < critical, d.str()};
}

Check disputes() {
  std::ostringstream d;
  bool pass = true;
  auto expect = [&](const Scenario& sc, const std::string& what,
                    const std::vector<::blinddrm::Outcome>& want) {
    std::string first = run(sc).report;
    ScenarioResult r = run(sc);
    bool ok = r.report == first && r.verdicts.size() == want.size();
    for (std::size_t i = 0; ok && i < want.size(); ++i) ok = r.verdicts[i].second.outcome == want[i];
    d << what << (ok ? " ok" : " WRONG") << "; ";
    pass = pass && ok;
  };
  using O = ::blinddrm::Outcome;
  for (Mode mode : {Mode::basic, Mode::enhanced}) {
    Scenario sc;
    sc.mode = mode;
    sc.price = 6;
    sc.seed = 77;
    sc.faults = {{FaultKind::wrong_terms, 0}};
    expect(sc, std::string(mode_name(mode)) + " wrong-terms->B", {O::seller_at_fault});
    sc.faults = {{FaultKind::corrupt_signature, 2}};
    expect(sc, "corrupt-signature->C", {O::seller_must_resign});
    sc.faults = {{FaultKind::wrong_s, 2}};
    expect(sc, "wrong-s->D x3", {O::seller_at_fault, O::seller_at_fault, O::seller_at_fault});
    sc.faults = {};
    sc.force_dispute = true;
    expect(sc, "honest->D x3",
           {O::buyer_claim_rejected, O::buyer_claim_rejected, O::buyer_claim_rejected});
  }

  // Proof soundness at q = 11: for a false statement count the
  // (commitment pair, challenge) combinations a forger can answer.
  GroupParams p = toy_params();
  GroupElement g = p.generator();
  GroupElement h = pow_mod(g, Exponent(p, 2), p);
  GroupElement y1 = pow_mod(g, Exponent(p, 3), p);
  GroupElement y2 = pow_mod(h, Exponent(p, 5), p);
  long answerable = 0, total = 0;
  for (long a = 0; a < 11; ++a) {
    for (long b = 0; b < 11; ++b) {
      GroupElement ca = pow_mod(g, Exponent(p, a), p), cb = pow_mod(g, Exponent(p, b), p);
      for (long c = 0; c < 11; ++c) {
        ++total;
        for (long z = 0; z < 11; ++z) {
          if (dleq_equations_hold(ca, cb, Exponent(p, c), Exponent(p, z), g, y1, h, y2, p)) {
            ++answerable;
            break;
          }
        }
      }
    }
  }
  double rate = static_cast<double>(answerable) / total;
  bool sound = rate <= 1.0 / 11 + 1e-12;
  d << "forgery success " << answerable << "/" << total << " = " << rate << " (1/q = " << 1.0 / 11
    << ")";
  return {pass && sound, d.str()};
}

Check upgrade_equivalence() {
  Market m(gen_params(64, 808), {{"two", 2, "song"}, {"five", 5, "song"}}, 808);
  auto first = PurchaseSession::begin(m.catalog, "two", m.cards(2, 1), Mode::basic, true, Rng(1));
  run_purchase(first, m.channel());
  auto up = PurchaseSession::upgrade_from(m.catalog, "two", first.acc(), "five", m.cards(3, 1),
                                          Mode::basic, true, Rng(2));
  run_purchase(up, m.channel());
  std::uint64_t spent = m.ledger.balance("seller");

  Market direct_shop(m.params, {{"two", 2, "song"}, {"five", 5, "song"}}, 808);
  auto direct = PurchaseSession::begin(direct_shop.catalog, "five", direct_shop.cards(5, 1),
                                       Mode::basic, true, Rng(3));
  run_purchase(direct, direct_shop.channel());

  bool same = up.acc().value() == direct.acc().value() &&
              up.acc().value() == m.expected_key("five", 5);
  std::ostringstream d;
  d << "2->5 key " << (same ? "bit-identical to" : "DIFFERS from") << " direct price-5 key; "
    << spent << " units spent";
  return {same && spent == 5, d.str()};
}

Check wire_robustness() {
  std::size_t golden_ok = 0, golden_total = 0;
  for (const auto& [name, m] : golden_messages()) {
    ++golden_total;
    std::string frozen = read_golden(name);
    try {
      if (!frozen.empty() && hex_encode(encode_message(m)) == frozen &&
          decode_message(hex_decode(frozen)) == m) {
        ++golden_ok;
      }
    } catch (const Error&) {
    }
  }
  Rng rng(31337);
  std::size_t decoded = 0, structured = 0, other = 0;
  auto goldens = golden_messages();
  for (int i = 0; i < 100000; ++i) {
    Bytes in;
    if (i % 2 == 0) {
      in = rng.bytes(rng.next_u64() % 96);
    } else {
      in = encode_message(goldens[i % goldens.size()].second);
      in[rng.next_u64() % in.size()] ^= static_cast<std::uint8_t>(1 + rng.next_u64() % 255);
    }
    try {
      Message m = decode_message(in);
      if (encode_message(m) == in) {
        ++decoded;
      } else {
        ++other;
      }
    } catch (const DecodeError&) {
      ++structured;
    } catch (...) {
      ++other;
    }
  }
  std::ostringstream d;
  d << golden_ok << "/" << golden_total << " golden vectors; fuzz 100000: " << decoded
    << " valid, " << structured << " structured errors, " << other << " other";
  return {golden_ok == golden_total && golden_total == 18 && other == 0, d.str()};
}

}  // namespace

int main() {
  std::vector<std::pair<std::string, std::function<Check()>>> criteria;
  SweepResult basic = sweep(Mode::basic);
  SweepResult enhanced = sweep(Mode::enhanced);
  criteria.push_back({"end-to-end correctness", end_to_end});
  criteria.push_back({"basic-mode computation", [&] { return basic_costs(basic); }});
  criteria.push_back({"enhanced-mode computation", [&] { return enhanced_costs(enhanced); }});
  criteria.push_back({"communication payload", [&] { return payload_bits(basic, enhanced); }});
  criteria.push_back({"double-spend safety", double_spend});
  criteria.push_back({"perfect blinding", blinding});
  criteria.push_back({"dispute resolution", disputes});
  criteria.push_back({"upgrade equivalence", upgrade_equivalence});
  criteria.push_back({"wire robustness", wire_robustness});

  std::vector<Check> results;
  for (const auto& [name, run_check] : criteria) {
    try {
      results.push_back(run_check());
    } catch (const std::exception& e) {
      results.push_back({false, std::string("exception: ") + e.what()});
    }
  }
  // Conservation covers every scenario run by any criterion.
  Check& spend = results[4];
  spend.pass = spend.pass && g_conservation;
  spend.detail += std::string("; conservation ") + (g_conservation ? "held" : "BROKEN") +
                  " after all " + std::to_string(g_scenarios) + " scenario runs";

  bool all = true;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    all = all && results[i].pass;
    std::printf("criterion %zu %-26s %s  %s\n", i + 1, criteria[i].first.c_str(),
                results[i].pass ? "PASS" : "FAIL", results[i].detail.c_str());
  }
  std::fflush(stdout);
  return all ? 0 : 1;
}
