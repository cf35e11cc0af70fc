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
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "blinddrm/errors.hpp"
#include "blinddrm/rng.hpp"

namespace blinddrm {

enum class CardStatus { generated, distributed, spent };

const char* card_status_name(CardStatus status);

/// One-time anonymous prepaid card. Holds no buyer information.
struct PrepaidCard {
  std::string card_id;  // 128-bit random value, hex
  std::uint64_t value = 1;
  CardStatus status = CardStatus::generated;
  std::optional<std::string> spent_by;
};

struct SpendReceipt {
  std::string card_id;
  std::string seller_account;
  std::uint64_t value = 0;
  std::uint64_t sequence = 0;

  bool operator==(const SpendReceipt&) const = default;
};

/// The bank's card database and seller accounts.
///
/// Every mutation takes the ledger lock, so a check-and-spend is one
/// linearizable transition. When backed by a file, each mutation is
/// appended as one tab-separated line per card:
///
///   seq  op(ISSUE|DIST|SPEND)  card_id  value  account
///
/// and replaying the file reconstructs the ledger exactly.
class CardLedger {
 public:
  explicit CardLedger(Rng rng);
  /// Replays `path` if it exists, then appends new records to it.
  CardLedger(Rng rng, const std::filesystem::path& path);

  CardLedger(const CardLedger&) = delete;
  CardLedger& operator=(const CardLedger&) = delete;

  std::vector<PrepaidCard> issue_cards(std::size_t count, std::uint64_t value);
  /// All-or-nothing; unknown-card or already-distributed on failure.
  void distribute(std::span<const std::string> card_ids, const std::string& store_id);

  SpendReceipt verify_and_spend(const std::string& card_id, const std::string& seller_account);
  /// Spends every card or none. Throws SpendError naming the first bad card.
  std::vector<SpendReceipt> spend_all(std::span<const std::string> card_ids,
                                      const std::string& seller_account);

  std::uint64_t balance(const std::string& seller_account) const;
  std::optional<PrepaidCard> card(const std::string& card_id) const;
  std::size_t card_count() const;
  std::uint64_t sequence() const;

  std::uint64_t total_spent_value() const;
  std::uint64_t total_balances() const;
  /// Sum of balances equals the total value of spent cards.
  bool conservation_holds() const;

 private:
  void apply_line(const std::string& line, std::size_t line_no);
  void append(std::uint64_t seq, const char* op, const std::string& card_id, std::uint64_t value,
              const std::string& account);
  void flush_log();

  mutable std::mutex mu_;
  Rng rng_;
  std::map<std::string, PrepaidCard> cards_;
  std::map<std::string, std::uint64_t> accounts_;
  std::map<std::string, std::uint64_t> spend_sequence_;
  std::uint64_t seq_ = 0;
  std::optional<std::ofstream> log_;
};

}  // namespace blinddrm
