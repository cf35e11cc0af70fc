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

// Command-line front end: run the bank, the seller, a buyer or the
// arbitrator as separate processes, or whole scenarios in one.

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "blinddrm/catalog.hpp"
#include "blinddrm/dispute.hpp"
#include "blinddrm/kvtext.hpp"
#include "blinddrm/report.hpp"
#include "blinddrm/scenario.hpp"
#include "blinddrm/services.hpp"

using namespace blinddrm;
using namespace std::chrono_literals;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitProtocol = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDispute = 3;

std::atomic<bool> g_stop{false};

void on_signal(int) { g_stop = true; }

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io_error, "cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw Error(Errc::io_error, "cannot write " + path);
}

Rng make_rng(const std::optional<std::uint64_t>& seed, std::string_view label) {
  return seed ? Rng(*seed).fork(label) : Rng::from_os();
}

void wait_for_signal() {
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  while (!g_stop) std::this_thread::sleep_for(100ms);
}

std::string cards_text(const std::vector<CardRef>& cards) {
  KvWriter w;
  for (const auto& c : cards) w.put("card", c.card_id + " " + std::to_string(c.value));
  return w.str();
}

std::vector<CardRef> parse_cards(const std::string& text) {
  KvReader r(text);
  std::vector<CardRef> out;
  while (!r.at_end()) {
    std::istringstream line(r.take("card"));
    CardRef c;
    if (!(line >> c.card_id >> c.value) || c.value == 0) r.fail("expected 'card: <id> <value>'");
    out.push_back(c);
  }
  return out;
}

/// Arbitrator stand-in when no seller address is given.
class AbsentSeller : public SellerResponder {
 public:
  StepResponse recompute(const GroupElement&, std::uint64_t) override { fail(); }
  DlEqProof prove_step(const GroupElement&, const GroupElement&, std::uint64_t) override { fail(); }
  ChainReveal reveal_chain(const std::string&, const std::vector<DisputeStep>&) override { fail(); }
  Exponent reveal_secret() override { fail(); }

 private:
  [[noreturn]] static void fail() { throw Error(Errc::seller_unresponsive, "no seller address given"); }
};

struct Options {
  std::optional<std::uint64_t> seed;
  std::string listen = "127.0.0.1:7400";
  std::string connect = "127.0.0.1:7400";
  std::string metrics_out;
  std::string transport = "memory";

  // bank
  std::string ledger_path;
  std::uint32_t count = 1;
  std::uint64_t value = 1;
  std::string store = "store-1";
  std::string cards_out = "cards.txt";

  // seller
  unsigned group_bits = 64;
  std::vector<std::string> licenses;
  std::string terms = "play; no-copy; expires-never";
  std::string catalog_path = "catalog.txt";
  std::string keys_path = "seller-keys.txt";
  std::string bank_addr = "127.0.0.1:7400";
  std::string seller_listen = "127.0.0.1:7401";
  std::string account = "seller";

  // buyer
  std::string license;
  std::string seller_connect = "127.0.0.1:7401";
  std::string mode = "basic";
  std::string cards_path = "cards.txt";
  bool refresh = true;
  std::string checkpoint;
  std::string resume;
  std::string upgrade_from;
  std::string key_hex;
  std::string key_out;
  std::string case_out = "case.txt";
  int method = 1;

  // arbitrate / scenario / verify
  std::string case_path;
  std::string seller_addr;
  std::string spec;
  std::string sweep_mode = "both";
  std::vector<std::uint64_t> prices = {1, 2, 4, 8, 16, 31};
  std::string file;
};

TransportKind transport_kind(const std::string& name) {
  if (name == "memory") return TransportKind::memory;
  if (name == "socket") return TransportKind::socket;
  throw Error(Errc::invalid_argument, "transport must be memory or socket");
}

int bank_serve(const Options& o) {
  Rng rng = make_rng(o.seed, "bank");
  std::unique_ptr<CardLedger> ledger =
      o.ledger_path.empty() ? std::make_unique<CardLedger>(std::move(rng))
                            : std::make_unique<CardLedger>(std::move(rng), o.ledger_path);
  BankService service(*ledger);
  MetricsCounters metrics;
  Server server(std::make_unique<TcpListener>(Address::parse(o.listen)),
                [&](const Message& m) { return service.handle(m); }, &metrics);
  server.start();
  std::cout << "bank listening on " << server.address().str() << std::endl;
  wait_for_signal();
  server.stop();
  if (!o.metrics_out.empty()) write_file(o.metrics_out, metrics_tsv({{"bank", metrics.snapshot()}}));
  return kExitOk;
}

int bank_issue(const Options& o) {
  auto conn = tcp_connect(Address::parse(o.connect));
  RemoteBank bank(*conn);
  auto cards = bank.issue(o.store, o.count, o.value);
  write_file(o.cards_out, cards_text(cards));
  std::cout << "issued " << cards.size() << " card(s) of value " << o.value << " to " << o.store
            << ", written to " << o.cards_out << "\n";
  return kExitOk;
}

int seller_setup(const Options& o) {
  if (o.licenses.empty()) throw Error(Errc::invalid_argument, "at least one --license ID:PRICE is required");
  Rng rng = make_rng(o.seed, "seller-setup");
  Rng group_rng = rng.fork("group");
  GroupParams params = gen_params(o.group_bits, group_rng);
  std::vector<LicenseSpec> specs;
  for (const auto& text : o.licenses) {
    std::vector<std::string> parts;
    std::stringstream in(text);
    for (std::string p; std::getline(in, p, ':');) parts.push_back(p);
    if (parts.size() < 2 || parts.size() > 3 || parts[0].empty()) {
      throw Error(Errc::invalid_argument, "license must be ID:PRICE[:X_LABEL], got '" + text + "'");
    }
    std::uint64_t price = std::stoull(parts[1]);
    LicensePlaintext pt{parts[0], o.terms, rng.bytes(16), {"play"}};
    specs.push_back({parts[0], parts[0], price, o.terms, pt, parts.size() == 3 ? parts[2] : ""});
  }
  SellerSetup setup_result = setup(params, specs, rng);
  write_file(o.catalog_path, setup_result.catalog.serialize());
  write_file(o.keys_path, setup_result.keys.serialize());
  std::cout << "catalog with " << specs.size() << " license(s) written to " << o.catalog_path
            << "; keys to " << o.keys_path << "\n";
  return kExitOk;
}

int seller_serve(const Options& o) {
  Catalog catalog = Catalog::parse(read_file(o.catalog_path));
  SellerKeys keys = SellerKeys::parse(read_file(o.keys_path), catalog.params);
  auto bank_conn = tcp_connect(Address::parse(o.bank_addr));
  bank_conn->set_group_bits(catalog.params.bits());
  RemoteBank bank(*bank_conn);
  SellerService service(keys, catalog, bank, o.account, make_rng(o.seed, "seller"));
  MetricsCounters metrics;
  Server server(std::make_unique<TcpListener>(Address::parse(o.seller_listen)),
                [&](const Message& m) { return service.handle(m); }, &metrics);
  server.set_group_bits(catalog.params.bits());
  server.start();
  std::cout << "seller listening on " << server.address().str() << std::endl;
  wait_for_signal();
  server.stop();
  if (!o.metrics_out.empty()) write_file(o.metrics_out, metrics_tsv({{"seller", metrics.snapshot()}}));
  return kExitOk;
}

int buyer_purchase(const Options& o) {
  auto conn = tcp_connect(Address::parse(o.seller_connect));
  auto catalog = std::make_shared<const Catalog>(fetch_catalog(*conn));
  conn->set_group_bits(catalog->params.bits());
  auto problems = verify_catalog(*catalog);
  if (!problems.empty()) {
    for (const auto& p : problems) std::cerr << "catalog: " << p << "\n";
    return kExitProtocol;
  }
  const GroupParams& params = catalog->params;
  std::vector<CardRef> cards = parse_cards(read_file(o.cards_path));
  Rng rng = make_rng(o.seed, "buyer");
  Mode mode = parse_mode(o.mode);

  MetricsCounters metrics;
  MetricsScope scope(&metrics);
  std::optional<PurchaseSession> session;
  if (!o.resume.empty()) {
    session.emplace(PurchaseSession::restore(catalog, read_file(o.resume), std::move(rng)));
  } else if (!o.upgrade_from.empty()) {
    GroupElement key(params, from_hex(o.key_hex));
    session.emplace(PurchaseSession::upgrade_from(catalog, o.upgrade_from, key, o.license, cards,
                                                  mode, o.refresh, std::move(rng)));
  } else {
    session.emplace(PurchaseSession::begin(catalog, o.license, cards, mode, o.refresh, std::move(rng)));
  }

  RemoteSeller seller(*conn, params);
  auto write_metrics = [&] {
    if (!o.metrics_out.empty()) write_file(o.metrics_out, metrics_tsv({{"buyer", metrics.snapshot()}}));
  };
  while (!session->complete()) {
    StepResponse resp = seller.step(session->next_request());
    try {
      session->process_response(resp);
    } catch (const Error& e) {
      if (e.code() != Errc::bad_signature) throw;
      write_file(o.case_out, make_type_c_case(*session).serialize());
      std::cerr << e.what() << "; type C case written to " << o.case_out << "\n";
      write_metrics();
      return kExitDispute;
    }
    if (!o.checkpoint.empty()) write_file(o.checkpoint, session->checkpoint());
  }
  write_metrics();

  LicensePlaintext pt;
  try {
    pt = session->finish();
  } catch (const Error& e) {
    if (e.code() != Errc::authentication_failure) throw;
    write_file(o.case_out, make_type_d_case(*session, static_cast<DMethod>(o.method)).serialize());
    std::cerr << e.what() << "; type D case written to " << o.case_out << "\n";
    return kExitDispute;
  }
  if (!o.key_out.empty()) write_file(o.key_out, to_hex(session->acc().value()) + "\n");
  std::cout << "license: " << pt.license_id << "\nterms: " << pt.terms << "\n";
  if (pt.terms != session->entry().terms) {
    write_file(o.case_out, make_type_b_case(*session, pt).serialize());
    std::cerr << "delivered terms differ from the published ones; type B case written to "
              << o.case_out << "\n";
    return kExitDispute;
  }
  return kExitOk;
}

int run_arbitrate(const Options& o) {
  Catalog catalog = Catalog::parse(read_file(o.catalog_path));
  DisputeCase c = DisputeCase::parse(read_file(o.case_path), catalog.params);
  Rng rng = make_rng(o.seed, "arbitrator");
  Verdict v;
  if (o.seller_addr.empty()) {
    AbsentSeller seller;
    v = arbitrate(c, catalog, seller, rng);
  } else {
    auto conn = tcp_connect(Address::parse(o.seller_addr));
    conn->set_group_bits(catalog.params.bits());
    RemoteSeller seller(*conn, catalog.params);
    v = arbitrate(c, catalog, seller, rng);
  }
  std::cout << v.report();
  return kExitOk;
}

int scenario_run(const Options& o, bool transport_given, bool seed_given) {
  Scenario sc = Scenario::parse(read_file(o.spec));
  if (transport_given) sc.transport = transport_kind(o.transport);
  if (seed_given) sc.seed = *o.seed;
  ScenarioResult r = run_scenario(sc);
  std::cout << r.report;
  if (!o.metrics_out.empty()) write_file(o.metrics_out, metrics_tsv(r.metrics));
  return r.exit_code();
}

int scenario_sweep(const Options& o) {
  std::vector<Mode> modes;
  if (o.sweep_mode == "both") {
    modes = {Mode::basic, Mode::enhanced};
  } else {
    modes = {parse_mode(o.sweep_mode)};
  }
  bool all = true;
  for (Mode m : modes) {
    SweepOptions opt;
    opt.mode = m;
    opt.prices = o.prices;
    opt.group_bits = o.group_bits;
    opt.seed = o.seed.value_or(1);
    opt.transport = transport_kind(o.transport);
    SweepResult r = report_tables(opt);
    std::cout << r.table << "\n";
    all = all && r.all_pass;
  }
  return all ? kExitOk : kExitProtocol;
}

int verify_catalog_file(const Options& o) {
  Catalog catalog = Catalog::parse(read_file(o.file));
  auto problems = verify_catalog(catalog);
  for (const auto& p : problems) std::cout << p << "\n";
  if (problems.empty()) {
    std::cout << "catalog ok: " << catalog.licenses.size() << " license(s), group "
              << catalog.params.bits() << " bits\n";
  }
  return problems.empty() ? kExitOk : kExitProtocol;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anonymous license purchase with prepaid cards"};
  app.require_subcommand(1);
  Options o;

  auto* bank = app.add_subcommand("bank", "Card-issuing bank");
  bank->require_subcommand(1);
  auto* bank_serve_cmd = bank->add_subcommand("serve", "Serve the card ledger");
  bank_serve_cmd->add_option("--listen", o.listen, "Address to listen on")->capture_default_str();
  bank_serve_cmd->add_option("--ledger", o.ledger_path, "Append-only ledger file");
  bank_serve_cmd->add_option("--seed", o.seed, "Deterministic card ids");
  bank_serve_cmd->add_option("--metrics-out", o.metrics_out, "Write counters on shutdown");
  auto* bank_issue_cmd = bank->add_subcommand("issue", "Mint cards for a store");
  bank_issue_cmd->add_option("--connect", o.connect, "Bank address")->capture_default_str();
  bank_issue_cmd->add_option("--count", o.count, "Number of cards")->capture_default_str();
  bank_issue_cmd->add_option("--value", o.value, "Units per card")->capture_default_str();
  bank_issue_cmd->add_option("--store", o.store, "Store id")->capture_default_str();
  bank_issue_cmd->add_option("--out", o.cards_out, "Cards file")->capture_default_str();

  auto* seller = app.add_subcommand("seller", "License seller");
  seller->require_subcommand(1);
  auto* seller_setup_cmd = seller->add_subcommand("setup", "Generate keys and a catalog");
  seller_setup_cmd->add_option("--group-bits", o.group_bits, "Modulus size")->capture_default_str();
  seller_setup_cmd->add_option("--license", o.licenses, "ID:PRICE[:X_LABEL], repeatable")->required();
  seller_setup_cmd->add_option("--terms", o.terms, "Published terms")->capture_default_str();
  seller_setup_cmd->add_option("--catalog-out", o.catalog_path, "Catalog file")->capture_default_str();
  seller_setup_cmd->add_option("--keys-out", o.keys_path, "Secret key file")->capture_default_str();
  seller_setup_cmd->add_option("--seed", o.seed, "Deterministic setup");
  auto* seller_serve_cmd = seller->add_subcommand("serve", "Answer purchase steps");
  seller_serve_cmd->add_option("--catalog", o.catalog_path, "Catalog file")->required();
  seller_serve_cmd->add_option("--keys", o.keys_path, "Secret key file")->capture_default_str();
  seller_serve_cmd->add_option("--listen", o.seller_listen, "Address to listen on")->capture_default_str();
  seller_serve_cmd->add_option("--bank", o.bank_addr, "Bank address")->capture_default_str();
  seller_serve_cmd->add_option("--account", o.account, "Account credited at the bank")->capture_default_str();
  seller_serve_cmd->add_option("--seed", o.seed, "Deterministic proofs");
  seller_serve_cmd->add_option("--metrics-out", o.metrics_out, "Write counters on shutdown");

  auto* buyer = app.add_subcommand("buyer", "License buyer");
  buyer->require_subcommand(1);
  auto* purchase = buyer->add_subcommand("purchase", "Buy (or upgrade to) a license");
  purchase->add_option("--license", o.license, "License id")->required();
  purchase->add_option("--mode", o.mode, "basic or enhanced")->capture_default_str();
  purchase->add_option("--cards", o.cards_path, "Cards file")->capture_default_str();
  purchase->add_option("--connect", o.seller_connect, "Seller address")->capture_default_str();
  purchase->add_option("--refresh", o.refresh, "New blinding factor every step")->capture_default_str();
  purchase->add_option("--seed", o.seed, "Deterministic blinding");
  purchase->add_option("--checkpoint", o.checkpoint, "Save progress after each step");
  purchase->add_option("--resume", o.resume, "Continue from a checkpoint");
  purchase->add_option("--from", o.upgrade_from, "Upgrade from this license");
  purchase->add_option("--key", o.key_hex, "Key of the --from license (hex)");
  purchase->add_option("--key-out", o.key_out, "Write the final key");
  purchase->add_option("--case-out", o.case_out, "Where a dispute case goes")->capture_default_str();
  purchase->add_option("--method", o.method, "Type D method for a case (1-3)")->check(CLI::Range(1, 3));
  purchase->add_option("--metrics-out", o.metrics_out, "Buyer counters");

  auto* arb = app.add_subcommand("arbitrate", "Resolve a dispute case");
  arb->add_option("--case", o.case_path, "Case file")->required();
  arb->add_option("--catalog", o.catalog_path, "Catalog file")->capture_default_str();
  arb->add_option("--connect", o.seller_addr, "Seller address; omit to treat the seller as absent");
  arb->add_option("--seed", o.seed, "Deterministic license audit choice");

  auto* scenario = app.add_subcommand("scenario", "In-process runs");
  scenario->require_subcommand(1);
  auto* run = scenario->add_subcommand("run", "Run one scenario file");
  run->add_option("--spec", o.spec, "Scenario file")->required();
  auto* transport_opt = run->add_option("--transport", o.transport, "memory or socket");
  auto* seed_opt = run->add_option("--seed", o.seed, "Override the scenario seed");
  run->add_option("--metrics-out", o.metrics_out, "Per-actor counters, tab separated");
  auto* sweep = scenario->add_subcommand("sweep", "Cost tables over a price sweep");
  sweep->add_option("--mode", o.sweep_mode, "basic, enhanced or both")->capture_default_str();
  sweep->add_option("--prices", o.prices, "Prices")->delimiter(',');
  sweep->add_option("--group-bits", o.group_bits, "Modulus size")->capture_default_str();
  sweep->add_option("--transport", o.transport, "memory or socket")->capture_default_str();
  sweep->add_option("--seed", o.seed, "Seed");

  auto* verify = app.add_subcommand("verify-catalog", "Audit a catalog file");
  verify->add_option("file", o.file, "Catalog file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (bank_serve_cmd->parsed()) return bank_serve(o);
    if (bank_issue_cmd->parsed()) return bank_issue(o);
    if (seller_setup_cmd->parsed()) return seller_setup(o);
    if (seller_serve_cmd->parsed()) return seller_serve(o);
    if (purchase->parsed()) return buyer_purchase(o);
    if (arb->parsed()) return run_arbitrate(o);
    if (run->parsed()) return scenario_run(o, transport_opt->count() > 0, seed_opt->count() > 0);
    if (sweep->parsed()) return scenario_sweep(o);
    if (verify->parsed()) return verify_catalog_file(o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    switch (e.code()) {
      case Errc::invalid_argument:
      case Errc::parse_error:
      case Errc::scenario_invalid:
      case Errc::io_error:
        return kExitUsage;
      default:
        return kExitProtocol;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
