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

#include <cstddef>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "blinddrm/cards.hpp"
#include "blinddrm/catalog.hpp"
#include "blinddrm/dispute.hpp"
#include "blinddrm/purchase.hpp"
#include "blinddrm/transport.hpp"

namespace blinddrm {

/// Wire front end of the card ledger: CARD_ISSUE and CARD_SPEND.
class BankService {
 public:
  explicit BankService(CardLedger& ledger) : ledger_(ledger) {}
  Message handle(const Message& request);

 private:
  CardLedger& ledger_;
};

/// Misbehaviour switches for fault-injection runs. Steps are numbered from 1
/// in the order this service executes them.
struct SellerFaults {
  std::optional<std::size_t> corrupt_signature_at;
  std::optional<std::size_t> wrong_s_at;  // answers with s+1 at that step
};

/// Wire front end of the seller: purchase steps, catalog, dispute queries.
class SellerService {
 public:
  SellerService(const SellerKeys& keys, const Catalog& catalog, BankAccess& bank,
                std::string account, Rng rng, SellerFaults faults = {});
  Message handle(const Message& request);

 private:
  Message handle_step(const msg::StepReq& req);

  const SellerKeys& keys_;
  const Catalog& catalog_;
  BankAccess& bank_;
  std::string account_;
  SellerFaults faults_;
  std::mutex mu_;  // guards responder_ (its rng) and the fault step counter
  KeyedSeller responder_;
  std::size_t steps_ = 0;
};

/// Card ledger reached over a connection; safe to share between threads.
class RemoteBank : public BankAccess {
 public:
  /// Traffic is charged to `charge_to` rather than the caller's scope, so a
  /// seller's bank calls stay apart from its buyer-facing counters.
  explicit RemoteBank(Connection& conn, MetricsCounters* charge_to = nullptr)
      : conn_(conn), charge_to_(charge_to) {}
  std::vector<SpendReceipt> spend(std::span<const std::string> card_ids,
                                  const std::string& seller_account) override;
  /// Mint `count` cards of `value` for a store.
  std::vector<CardRef> issue(const std::string& store_id, std::uint32_t count,
                             std::uint64_t value);

 private:
  Message round_trip(const Message& request);

  Connection& conn_;
  MetricsCounters* charge_to_;
  std::mutex mu_;
};

/// Seller reached over a connection, as buyer (step channel) and as
/// arbitrator (dispute responder).
class RemoteSeller : public SellerResponder {
 public:
  RemoteSeller(Connection& conn, const GroupParams& params) : conn_(conn), params_(params) {}

  StepResponse step(const StepRequest& request);
  StepChannel channel() {
    return [this](const StepRequest& r) { return step(r); };
  }

  StepResponse recompute(const GroupElement& q, std::uint64_t power) override;
  DlEqProof prove_step(const GroupElement& q, const GroupElement& n,
                       std::uint64_t power) override;
  ChainReveal reveal_chain(const std::string& license_id,
                           const std::vector<DisputeStep>& steps) override;
  Exponent reveal_secret() override;

 private:
  Connection& conn_;
  const GroupParams& params_;
};

/// CATALOG_GET round trip; throws Errc::parse_error on a bad catalog.
Catalog fetch_catalog(Connection& conn);

}  // namespace blinddrm
