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

// Shared fixtures: a seller, a ledger and a direct in-process step channel.

#include <gmpxx.h>

#include <memory>
#include <string>
#include <vector>

#include "blinddrm/catalog.hpp"
#include "blinddrm/cards.hpp"
#include "blinddrm/purchase.hpp"

namespace blinddrm::testing {

// The toy group used throughout: n = 23, q = 11, g = 4.
inline GroupParams toy_params() { return GroupParams(23, 4); }

inline const std::string kTerms = "play; no-copy";

struct Offer {
  std::string id;
  std::uint64_t price;
  std::string x_label;  // empty: own x
  std::string delivered_terms = "";  // empty: as published
};

inline LicensePlaintext plaintext_for(const std::string& id, const std::string& terms) {
  return {id, terms, Bytes(32, 0x5a), {"play"}};
}

struct Market {
  GroupParams params;
  SellerSetup seller;
  std::shared_ptr<const Catalog> catalog;
  CardLedger ledger;
  LedgerBank bank{ledger};
  std::string account = "seller";

  Market(GroupParams p, const std::vector<Offer>& offers, std::uint64_t seed)
      : params(std::move(p)), seller(make_seller(params, offers, seed)),
        catalog(std::make_shared<const Catalog>(seller.catalog)),
        ledger(Rng(seed).fork("ledger")) {}

  static SellerSetup make_seller(const GroupParams& params, const std::vector<Offer>& offers,
                                 std::uint64_t seed) {
    std::vector<LicenseSpec> specs;
    for (const auto& o : offers) {
      const std::string delivered = o.delivered_terms.empty() ? kTerms : o.delivered_terms;
      specs.push_back({o.id, "content-" + o.id, o.price, kTerms, plaintext_for(o.id, delivered),
                       o.x_label});
    }
    Rng rng = Rng(seed).fork("seller");
    return setup(params, specs, rng);
  }

  std::vector<CardRef> cards(std::size_t count, std::uint64_t value) {
    std::vector<CardRef> out;
    std::vector<std::string> ids;
    for (const auto& c : ledger.issue_cards(count, value)) {
      out.push_back({c.card_id, c.value});
      ids.push_back(c.card_id);
    }
    ledger.distribute(ids, "store");
    return out;
  }

  /// One card per planned step, each worth exactly that step.
  std::vector<CardRef> matched_cards(std::uint64_t price, Mode mode) {
    std::set<std::uint64_t> powers = mode == Mode::basic ? std::set<std::uint64_t>{1} : catalog->powers();
    std::vector<CardRef> out;
    for (std::uint64_t t : plan_steps(price, powers)) {
      auto c = cards(1, t);
      out.push_back(c.front());
    }
    return out;
  }

  StepChannel channel() {
    return [this](const StepRequest& r) {
      return seller_handle_step(r, seller.keys, bank, params, account);
    };
  }

  /// Direct oracle with raw GMP: x^(s^price mod q) mod n.
  mpz_class expected_key(const std::string& license_id, std::uint64_t price) const {
    mpz_class e, out;
    mpz_class price_z(std::to_string(price));
    mpz_powm(e.get_mpz_t(), seller.keys.s.value().get_mpz_t(), price_z.get_mpz_t(),
             params.order().get_mpz_t());
    mpz_powm(out.get_mpz_t(), catalog->license(license_id).x.value().get_mpz_t(), e.get_mpz_t(),
             params.modulus().get_mpz_t());
    return out;
  }
};

}  // namespace blinddrm::testing
