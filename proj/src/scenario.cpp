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

#include "blinddrm/scenario.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "blinddrm/catalog.hpp"
#include "blinddrm/errors.hpp"
#include "blinddrm/kvtext.hpp"
#include "blinddrm/services.hpp"

namespace blinddrm {

namespace {

constexpr std::uint64_t kMaxPrice = 4096;
constexpr unsigned kMinGroupBits = 8;
constexpr unsigned kMaxGroupBits = 4096;
const std::string kSellerAccount = "seller";
const std::string kStore = "store-1";

const char* fault_name(FaultKind kind) {
  switch (kind) {
    case FaultKind::corrupt_signature: return "corrupt-signature";
    case FaultKind::wrong_terms: return "wrong-terms";
    case FaultKind::wrong_s: return "wrong-s";
    case FaultKind::double_spend: return "double-spend";
  }
  return "?";
}

[[noreturn]] void invalid(const std::string& what) { throw Error(Errc::scenario_invalid, what); }

std::uint64_t parse_uint(std::string_view key, const std::string& v) {
  if (v.empty() || v.size() > 19 || v.find_first_not_of("0123456789") != std::string::npos ||
      (v.size() > 1 && v[0] == '0')) {
    invalid("'" + std::string(key) + "' must be an unsigned integer, got '" + v + "'");
  }
  return std::stoull(v);
}

bool parse_flag(std::string_view key, const std::string& v) {
  if (v == "1" || v == "on" || v == "true") return true;
  if (v == "0" || v == "off" || v == "false") return false;
  invalid("'" + std::string(key) + "' must be 0 or 1, got '" + v + "'");
}

Fault parse_fault(const std::string& v) {
  auto at = v.find('@');
  std::string name = v.substr(0, at);
  Fault f{FaultKind::wrong_terms, 0};
  if (name == "corrupt-signature") {
    f.kind = FaultKind::corrupt_signature;
  } else if (name == "wrong-terms") {
    f.kind = FaultKind::wrong_terms;
  } else if (name == "wrong-s") {
    f.kind = FaultKind::wrong_s;
  } else if (name == "double-spend") {
    f.kind = FaultKind::double_spend;
  } else {
    invalid("unknown fault '" + name + "'");
  }
  if (f.kind == FaultKind::wrong_terms) {
    if (at != std::string::npos) invalid("wrong-terms takes no step");
  } else {
    if (at == std::string::npos) invalid("fault '" + name + "' needs @step");
    f.step = parse_uint("fault", v.substr(at + 1));
  }
  return f;
}

std::string join(const std::vector<std::uint64_t>& v) {
  std::string out;
  for (auto x : v) out += (out.empty() ? "" : ",") + std::to_string(x);
  return out;
}

std::set<std::uint64_t> planning_powers(Mode mode, std::uint64_t price) {
  if (mode == Mode::basic) return {1};
  auto p = default_k_powers(price);
  return {p.begin(), p.end()};
}

Metrics plus(const Metrics& a, const Metrics& b) {
  Metrics m;
  m.exponentiations = a.exponentiations + b.exponentiations;
  m.divisions = a.divisions + b.divisions;
  m.signings = a.signings + b.signings;
  m.verifications = a.verifications + b.verifications;
  m.messages_sent = a.messages_sent + b.messages_sent;
  m.bytes_sent = a.bytes_sent + b.bytes_sent;
  m.step_payload_bits = a.step_payload_bits + b.step_payload_bits;
  return m;
}

/// Connections between the actors, in memory or over loopback sockets.
/// Declared after everything the services reference so it is torn down
/// first.
struct Network {
  std::unique_ptr<Connection> seller_to_bank;
  std::unique_ptr<Connection> store_to_bank;
  std::unique_ptr<Connection> buyer_to_seller;
  std::unique_ptr<Connection> arbitrator_to_seller;
  std::vector<std::unique_ptr<BackgroundService>> memory_services;
  std::unique_ptr<Server> bank_server;
  std::unique_ptr<Server> seller_server;

  ~Network() {
    memory_services.clear();
    if (seller_server) seller_server->stop();
    if (bank_server) bank_server->stop();
  }
};

}  // namespace

CardPlan Scenario::card_plan() const {
  if (cards) return *cards;
  return mode == Mode::basic ? CardPlan::unit : CardPlan::matched;
}

std::optional<Fault> Scenario::fault(FaultKind kind) const {
  for (const auto& f : faults) {
    if (f.kind == kind) return f;
  }
  return std::nullopt;
}

std::string Scenario::serialize() const {
  KvWriter w;
  w.put("mode", mode_name(mode))
      .put("price", price)
      .put("refresh", refresh_blinding ? 1 : 0)
      .put("group_bits", group_bits)
      .put("seed", seed)
      .put("transport", transport == TransportKind::memory ? "memory" : "socket");
  if (cards) w.put("cards", *cards == CardPlan::unit ? "unit" : "matched");
  for (const auto& f : faults) {
    std::string v = fault_name(f.kind);
    if (f.kind != FaultKind::wrong_terms) v += "@" + std::to_string(f.step);
    w.put("fault", v);
  }
  std::string methods;
  for (auto m : dispute_methods) {
    methods += (methods.empty() ? "" : ",") + std::to_string(static_cast<int>(m));
  }
  w.put("dispute_methods", methods.empty() ? "none" : methods);
  w.put("force_dispute", force_dispute ? 1 : 0);
  return w.str();
}

Scenario Scenario::parse(std::string_view text) {
  Scenario sc;
  std::set<std::string> seen;
  try {
    KvReader r(text);
    while (!r.at_end()) {
      std::string key(r.next_key());
      std::string v = r.take(key);
      if (key != "fault" && !seen.insert(key).second) invalid("duplicate key '" + key + "'");
      if (key == "mode") {
        try {
          sc.mode = parse_mode(v);
        } catch (const Error&) {
          invalid("mode must be basic or enhanced, got '" + v + "'");
        }
      } else if (key == "price") {
        sc.price = parse_uint(key, v);
      } else if (key == "refresh") {
        sc.refresh_blinding = parse_flag(key, v);
      } else if (key == "group_bits") {
        std::uint64_t b = parse_uint(key, v);
        if (b > kMaxGroupBits) invalid("group_bits too large");
        sc.group_bits = static_cast<unsigned>(b);
      } else if (key == "seed") {
        sc.seed = parse_uint(key, v);
      } else if (key == "transport") {
        if (v == "memory") {
          sc.transport = TransportKind::memory;
        } else if (v == "socket") {
          sc.transport = TransportKind::socket;
        } else {
          invalid("transport must be memory or socket, got '" + v + "'");
        }
      } else if (key == "cards") {
        if (v == "unit") {
          sc.cards = CardPlan::unit;
        } else if (v == "matched") {
          sc.cards = CardPlan::matched;
        } else {
          invalid("cards must be unit or matched, got '" + v + "'");
        }
      } else if (key == "fault") {
        sc.faults.push_back(parse_fault(v));
      } else if (key == "dispute_methods") {
        sc.dispute_methods.clear();
        if (v != "none") {
          std::stringstream in(v);
          std::string item;
          while (std::getline(in, item, ',')) {
            std::uint64_t m = parse_uint(key, item);
            if (m < 1 || m > 3) invalid("dispute method must be 1, 2 or 3");
            sc.dispute_methods.push_back(static_cast<DMethod>(m));
          }
        }
      } else if (key == "force_dispute") {
        sc.force_dispute = parse_flag(key, v);
      } else {
        invalid("unknown key '" + key + "'");
      }
    }
  } catch (const Error& e) {
    if (e.code() == Errc::scenario_invalid) throw;
    invalid(e.what());
  }
  sc.validate();
  return sc;
}

void Scenario::validate() const {
  if (price == 0 || price > kMaxPrice) invalid("price must be in 1.." + std::to_string(kMaxPrice));
  if (group_bits < kMinGroupBits) invalid("group_bits must be at least " + std::to_string(kMinGroupBits));
  std::set<FaultKind> kinds;
  std::size_t steps = plan_steps(price, planning_powers(mode, price)).size();
  for (const auto& f : faults) {
    if (!kinds.insert(f.kind).second) invalid(std::string("fault ") + fault_name(f.kind) + " given twice");
    if (f.kind == FaultKind::wrong_terms) continue;
    if (f.step == 0 || f.step > steps) {
      invalid(std::string(fault_name(f.kind)) + " step must be in 1.." + std::to_string(steps));
    }
    if (f.kind == FaultKind::double_spend && f.step < 2) {
      invalid("double-spend replays an earlier step's cards; step must be at least 2");
    }
  }
}

int ScenarioResult::exit_code() const {
  switch (status) {
    case RunStatus::completed: return 0;
    case RunStatus::protocol_failure: return 1;
    case RunStatus::dispute: return 3;
  }
  return 1;
}

const std::vector<std::string>& actor_names() {
  static const std::vector<std::string> names = {"buyer", "seller", "bank", "arbitrator"};
  return names;
}

std::string metrics_tsv(const std::map<std::string, Metrics>& metrics) {
  std::string out;
  for (const auto& actor : actor_names()) {
    auto it = metrics.find(actor);
    if (it == metrics.end()) continue;
    for (const auto& [name, value] : it->second.fields()) {
      out += actor + "\t" + name + "\t" + std::to_string(value) + "\n";
    }
  }
  return out;
}

ScenarioResult run_scenario(const Scenario& sc) {
  sc.validate();
  ScenarioResult res;
  Rng root(sc.seed);

  MetricsCounters buyer_m, seller_m, bank_m, arb_m;
  Rng group_rng = root.fork("group");
  const GroupParams params = gen_params(sc.group_bits, group_rng);

  CardLedger ledger(root.fork("bank"));
  BankService bank_service(ledger);

  // Seller setup. The published terms never change; wrong-terms encrypts
  // different ones.
  const std::string published = "play; no-copy; expires-never";
  auto plaintext = [&](const std::string& id, Rng& rng) {
    LicensePlaintext pt;
    pt.license_id = id;
    pt.terms = published;
    pt.content_key = rng.bytes(16);
    pt.permissions = {"play"};
    return pt;
  };
  Rng setup_rng = root.fork("seller-setup");
  std::vector<LicenseSpec> specs;
  specs.push_back({"lic-preview", "content-1", 1, published, plaintext("lic-preview", setup_rng), "preview"});
  specs.push_back({"lic-main", "content-1", sc.price, published, plaintext("lic-main", setup_rng), "main"});
  if (sc.fault(FaultKind::wrong_terms)) specs.back().plaintext.terms = "play; copy; print; expires-never";
  const SellerSetup seller = setup(params, specs, setup_rng);

  SellerFaults faults;
  if (auto f = sc.fault(FaultKind::corrupt_signature)) faults.corrupt_signature_at = f->step;
  if (auto f = sc.fault(FaultKind::wrong_s)) faults.wrong_s_at = f->step;

  // Everything below talks over connections.
  std::unique_ptr<RemoteBank> seller_bank;
  std::unique_ptr<SellerService> seller_service;
  Network net;
  auto bank_handler = [&bank_service](const Message& m) { return bank_service.handle(m); };
  auto make_seller = [&](Connection& to_bank) {
    seller_bank = std::make_unique<RemoteBank>(to_bank);
    seller_service = std::make_unique<SellerService>(seller.keys, seller.catalog, *seller_bank,
                                                     kSellerAccount, root.fork("seller"), faults);
  };
  auto seller_handler = [&seller_service](const Message& m) { return seller_service->handle(m); };

  if (sc.transport == TransportKind::memory) {
    auto link = [&](std::unique_ptr<Connection>& client, Handler h, MetricsCounters* m) {
      auto [a, b] = memory_pair();
      a->set_group_bits(params.bits());
      b->set_group_bits(params.bits());
      client = std::move(a);
      net.memory_services.push_back(std::make_unique<BackgroundService>(std::move(b), h, m));
    };
    link(net.seller_to_bank, bank_handler, &bank_m);
    link(net.store_to_bank, bank_handler, &bank_m);
    make_seller(*net.seller_to_bank);
    link(net.buyer_to_seller, seller_handler, &seller_m);
    link(net.arbitrator_to_seller, seller_handler, &seller_m);
  } else {
    const Address loopback{"127.0.0.1", 0};
    net.bank_server = std::make_unique<Server>(std::make_unique<TcpListener>(loopback), bank_handler, &bank_m);
    net.bank_server->set_group_bits(params.bits());
    net.bank_server->start();
    net.seller_to_bank = tcp_connect(net.bank_server->address());
    net.store_to_bank = tcp_connect(net.bank_server->address());
    make_seller(*net.seller_to_bank);
    net.seller_server = std::make_unique<Server>(std::make_unique<TcpListener>(loopback), seller_handler, &seller_m);
    net.seller_server->set_group_bits(params.bits());
    net.seller_server->start();
    net.buyer_to_seller = tcp_connect(net.seller_server->address());
    net.arbitrator_to_seller = tcp_connect(net.seller_server->address());
  }
  for (auto* c : {net.seller_to_bank.get(), net.store_to_bank.get(), net.buyer_to_seller.get(),
                  net.arbitrator_to_seller.get()}) {
    c->set_group_bits(params.bits());
  }

  // Setup traffic (catalog download, card purchase) is not charged to anyone.
  std::shared_ptr<const Catalog> catalog;
  std::vector<CardRef> wallet;
  Catalog arbitrator_catalog = seller.catalog;
  {
    MetricsScope none(nullptr);
    catalog = std::make_shared<const Catalog>(fetch_catalog(*net.buyer_to_seller));
    arbitrator_catalog = fetch_catalog(*net.arbitrator_to_seller);
    auto problems = verify_catalog(*catalog);
    if (!problems.empty()) invalid("catalog audit failed: " + problems.front());
    RemoteBank store(*net.store_to_bank);
    res.plan = plan_steps(sc.price, planning_powers(sc.mode, sc.price));
    if (sc.card_plan() == CardPlan::unit) {
      wallet = store.issue(kStore, static_cast<std::uint32_t>(sc.price), 1);
    } else {
      for (std::uint64_t t : res.plan) {
        auto cards = store.issue(kStore, 1, t);
        wallet.insert(wallet.end(), cards.begin(), cards.end());
      }
    }
  }

  RemoteSeller to_seller(*net.buyer_to_seller, params);
  RemoteSeller arbitrator_link(*net.arbitrator_to_seller, params);
  Rng arbitrator_rng = root.fork("arbitrator");
  auto arbitrate_case = [&](const std::string& label, const DisputeCase& c) {
    MetricsScope scope(&arb_m);
    Verdict v = arbitrate(c, arbitrator_catalog, arbitrator_link, arbitrator_rng);
    res.verdicts.emplace_back(label, v);
    return v;
  };

  const Metrics seller_start = seller_m.snapshot();
  const Metrics bank_start = bank_m.snapshot();
  Metrics seller_disputes;  // seller work done for the arbitrator mid-purchase

  std::optional<PurchaseSession> session;
  {
    MetricsScope scope(&buyer_m);
    session.emplace(PurchaseSession::begin(catalog, "lic-main", wallet, sc.mode,
                                           sc.refresh_blinding, root.fork("buyer")));
    std::vector<std::string> previous_cards;
    std::size_t step = 0;
    const auto replay = sc.fault(FaultKind::double_spend);
    while (!session->complete()) {
      StepRequest req = session->next_request();
      ++step;
      std::optional<Metrics> before;
      if (replay && replay->step == step) {
        req.card_ids = previous_cards;
        before = seller_m.snapshot();
      }
      std::optional<StepResponse> resp;
      try {
        resp = to_seller.step(req);
      } catch (const Error& e) {
        if (before) res.replayed_step_seller = seller_m.snapshot().since(*before);
        res.failure = e.what();
        break;
      }
      try {
        session->process_response(*resp);
      } catch (const Error& e) {
        if (e.code() != Errc::bad_signature) {
          res.failure = e.what();
          break;
        }
        Metrics s0 = seller_m.snapshot();
        Verdict v = arbitrate_case("C", make_type_c_case(*session));
        seller_disputes = plus(seller_disputes, seller_m.snapshot().since(s0));
        if (v.forwarded_response && v.forwarded_signature) {
          try {
            session->process_response({*v.forwarded_response, *v.forwarded_signature});
          } catch (const Error& e2) {
            res.failure = std::string("after arbitration: ") + e2.what();
            break;
          }
        } else {
          res.failure = e.what();
          break;
        }
      }
      previous_cards = req.card_ids;
    }
  }
  res.metrics["buyer"] = buyer_m.snapshot();
  res.metrics["seller"] = seller_m.snapshot().since(seller_start).since(seller_disputes);
  res.metrics["bank"] = bank_m.snapshot().since(bank_start);

  res.purchase_complete = session->complete();
  if (res.purchase_complete) {
    const LicenseEntry& entry = catalog->license("lic-main");
    res.key_correct = session->acc() == derive_license_key(entry.x, sc.price, seller.keys.s, params);
    bool dispute_d = sc.force_dispute;
    try {
      LicensePlaintext pt = session->finish();
      res.license_decrypted = true;
      if (pt.terms != entry.terms) arbitrate_case("B", make_type_b_case(*session, pt));
    } catch (const Error& e) {
      if (e.code() != Errc::authentication_failure) throw;
      res.failure = e.what();
      dispute_d = true;
    }
    if (dispute_d) {
      for (DMethod m : sc.dispute_methods) {
        arbitrate_case("D/method" + std::to_string(static_cast<int>(m)), make_type_d_case(*session, m));
      }
    }
  }
  res.metrics["arbitrator"] = arb_m.snapshot();

  res.seller_balance = ledger.balance(kSellerAccount);
  res.cards_spent_value = ledger.total_spent_value();
  res.conservation = ledger.conservation_holds();

  if (!res.verdicts.empty()) {
    res.status = RunStatus::dispute;
  } else if (res.failure || !res.purchase_complete) {
    res.status = RunStatus::protocol_failure;
  }

  KvWriter w;
  w.put("blinddrm-report", 1);
  KvReader scenario_lines(sc.serialize());
  while (!scenario_lines.at_end()) {
    std::string key(scenario_lines.next_key());
    w.put("scenario." + key, scenario_lines.take(key));
  }
  w.put("group.n", to_hex(params.modulus()))
      .put("plan", join(res.plan))
      .put("steps_done", session->steps_done())
      .put("purchase", res.purchase_complete ? "complete" : "aborted")
      .put("key_correct", res.key_correct ? 1 : 0)
      .put("license_decrypted", res.license_decrypted ? 1 : 0);
  if (res.failure) w.put("failure", *res.failure);
  if (res.replayed_step_seller) {
    w.put("replayed_step.seller_exponentiations", res.replayed_step_seller->exponentiations);
  }
  for (std::size_t i = 0; i < res.verdicts.size(); ++i) {
    const auto& [label, v] = res.verdicts[i];
    std::string prefix = "dispute." + std::to_string(i + 1) + ".";
    w.put(prefix + "kind", label);
    KvReader lines(v.report());
    while (!lines.at_end()) {
      std::string key(lines.next_key());
      w.put(prefix + key, lines.take(key));
    }
  }
  w.put("seller_balance", res.seller_balance)
      .put("cards_spent_value", res.cards_spent_value)
      .put("conservation", res.conservation ? "ok" : "violated");
  for (const auto& actor : actor_names()) {
    for (const auto& [name, value] : res.metrics[actor].fields()) {
      w.put("metrics." + actor + "." + name, value);
    }
  }
  w.put("status", res.status == RunStatus::completed          ? "completed"
                  : res.status == RunStatus::protocol_failure ? "protocol-failure"
                                                              : "dispute");
  res.report = w.str();
  return res;
}

}  // namespace blinddrm
