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
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blinddrm/cards.hpp"
#include "blinddrm/catalog.hpp"
#include "blinddrm/group.hpp"
#include "blinddrm/license.hpp"
#include "blinddrm/rng.hpp"

namespace blinddrm {

/// basic: one unit per step using K_1 only; enhanced: multi-unit steps over
/// the published K-table.
enum class Mode { basic, enhanced };

const char* mode_name(Mode mode);
Mode parse_mode(std::string_view name);  // throws Errc::invalid_argument

/// Greedy largest-power-first decomposition of `price`. Minimal length for
/// power-of-two sets. Throws Errc::missing_k_power if 1 is not available.
std::vector<std::uint64_t> plan_steps(std::uint64_t price, const std::set<std::uint64_t>& powers);

struct CardRef {
  std::string card_id;
  std::uint64_t value = 1;
  bool operator==(const CardRef&) const = default;
};

/// Buyer to seller. Carries no step index or session id, so all requests
/// look alike.
struct StepRequest {
  std::vector<std::string> card_ids;
  GroupElement m;
};

struct StepResponse {
  GroupElement m_out;
  Bytes step_signature;  // over step_signature_payload(m, m_out)
};

/// One completed step, kept exactly as exchanged (dispute evidence).
struct StepTranscript {
  GroupElement request;   // Q_k
  GroupElement response;  // N_k
  std::uint64_t power = 1;
  Bytes step_signature;
  std::vector<std::string> card_ids;
};

/// Canonical encoding of (m, m_out) and nothing else, so signatures cannot
/// link steps together.
Bytes step_signature_payload(const GroupElement& m, const GroupElement& m_out);
bool verify_step_signature(const VerifyKey& pk, const GroupElement& m, const GroupElement& m_out,
                           ByteView signature);

/// Buyer side of one license acquisition.
///
/// With r = g^alpha the k-th request is m = r * acc and the seller answers
/// m^(s^t); dividing by K_t^alpha leaves acc^(s^t). After the last step acc
/// is x^(s^price), the license key.
class PurchaseSession {
 public:
  static PurchaseSession begin(std::shared_ptr<const Catalog> catalog, std::string license_id,
                               std::vector<CardRef> cards, Mode mode, bool refresh_blinding,
                               Rng rng);

  /// Continues the key tower of `from_license_id` (key = its decryption key)
  /// up to `to_license_id`. Both licenses must share x.
  static PurchaseSession upgrade_from(std::shared_ptr<const Catalog> catalog,
                                      std::string_view from_license_id, const GroupElement& key,
                                      std::string to_license_id, std::vector<CardRef> cards,
                                      Mode mode, bool refresh_blinding, Rng rng);

  /// Same request again until a response for it is accepted.
  StepRequest next_request();
  /// Throws Errc::bad_signature (state unchanged, response kept in
  /// rejected()) or Errc::malformed_element.
  void process_response(const StepResponse& response);
  /// Throws Errc::incomplete_session or Errc::authentication_failure.
  LicensePlaintext finish() const;

  const std::string& license_id() const { return license_id_; }
  const Catalog& catalog() const { return *catalog_; }
  const LicenseEntry& entry() const { return catalog_->license(license_id_); }
  const GroupElement& acc() const { return acc_; }
  std::uint64_t remaining() const { return remaining_; }
  bool complete() const { return remaining_ == 0; }
  const std::vector<std::uint64_t>& plan() const { return plan_; }
  std::size_t steps_done() const { return next_step_; }
  bool refresh_blinding() const { return refresh_; }
  const std::vector<StepTranscript>& transcripts() const { return transcripts_; }
  /// Blinding exponent used for each completed step. Buyer-private; only
  /// disclosed as type-B evidence.
  const std::vector<Exponent>& step_alphas() const { return step_alphas_; }
  /// Key the tower started from (x, or the pre-upgrade key).
  const GroupElement& start_key() const { return start_key_; }
  std::uint64_t start_level() const { return start_level_; }

  struct Rejected {
    StepRequest request;
    StepResponse response;
    std::uint64_t power;
  };
  const std::optional<Rejected>& rejected() const { return rejected_; }

  /// Resume file: license, blinding state, progress, transcripts.
  std::string checkpoint() const;
  static PurchaseSession restore(std::shared_ptr<const Catalog> catalog, std::string_view text,
                                 Rng rng);

 private:
  PurchaseSession(std::shared_ptr<const Catalog> catalog, std::string license_id,
                  GroupElement start_key, std::uint64_t start_level, std::uint64_t remaining,
                  bool refresh, Rng rng);

  void plan_and_assign(std::vector<CardRef> cards, Mode mode);
  void new_blinding();
  const GroupElement& unblinder(std::uint64_t power);

  std::shared_ptr<const Catalog> catalog_;
  std::string license_id_;
  bool refresh_;
  Rng rng_;
  Exponent alpha_;
  GroupElement r_;
  std::map<std::uint64_t, GroupElement> unblinders_;
  GroupElement start_key_;
  std::uint64_t start_level_;
  GroupElement acc_;
  std::uint64_t remaining_;
  std::vector<std::uint64_t> plan_;
  std::vector<std::vector<CardRef>> step_cards_;
  std::size_t next_step_ = 0;
  std::optional<StepRequest> outstanding_;
  std::optional<Rejected> rejected_;
  std::vector<StepTranscript> transcripts_;
  std::vector<Exponent> step_alphas_;
};

/// Bank as seen by a seller.
class BankAccess {
 public:
  virtual ~BankAccess() = default;
  /// All-or-nothing verify-and-spend; throws SpendError.
  virtual std::vector<SpendReceipt> spend(std::span<const std::string> card_ids,
                                          const std::string& seller_account) = 0;
};

class LedgerBank : public BankAccess {
 public:
  explicit LedgerBank(CardLedger& ledger) : ledger_(ledger) {}
  std::vector<SpendReceipt> spend(std::span<const std::string> card_ids,
                                  const std::string& seller_account) override {
    return ledger_.spend_all(card_ids, seller_account);
  }

 private:
  CardLedger& ledger_;
};

/// Stateless seller step: validate m, spend every card (all or none), then
/// answer m^(s^t) where t is the total card value, signed over (m, m^(s^t)).
/// Nothing is exponentiated if the cards are rejected.
StepResponse seller_handle_step(const StepRequest& request, const SellerKeys& keys,
                                BankAccess& bank, const GroupParams& params,
                                const std::string& seller_account);

using StepChannel = std::function<StepResponse(const StepRequest&)>;

/// Drives a session to completion and decrypts the license.
LicensePlaintext run_purchase(PurchaseSession& session, const StepChannel& channel);

/// Zero-cost upgrade: `to_price - from_price` more units on an existing key.
LicensePlaintext upgrade(std::shared_ptr<const Catalog> catalog, std::string_view from_license_id,
                         const GroupElement& key, std::string to_license_id,
                         std::vector<CardRef> cards, Mode mode, bool refresh_blinding, Rng rng,
                         const StepChannel& channel);

}  // namespace blinddrm
