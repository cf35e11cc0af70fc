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

#include "blinddrm/cards.hpp"

#include <set>
#include <sstream>

namespace blinddrm {

const char* card_status_name(CardStatus status) {
  switch (status) {
    case CardStatus::generated: return "generated";
    case CardStatus::distributed: return "distributed";
    case CardStatus::spent: return "spent";
  }
  return "?";
}

CardLedger::CardLedger(Rng rng) : rng_(std::move(rng)) {}

CardLedger::CardLedger(Rng rng, const std::filesystem::path& path) : rng_(std::move(rng)) {
  if (std::filesystem::exists(path)) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot read ledger " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty()) apply_line(line, line_no);
    }
  }
  log_.emplace(path, std::ios::app);
  if (!*log_) throw Error(Errc::io_error, "cannot append to ledger " + path.string());
}

void CardLedger::apply_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> f;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) f.push_back(field);
  auto bad = [&](const std::string& why) {
    throw Error(Errc::parse_error, "ledger line " + std::to_string(line_no) + ": " + why);
  };
  if (f.size() != 5) bad("expected 5 fields");
  std::uint64_t seq = 0;
  std::uint64_t value = 0;
  try {
    seq = std::stoull(f[0]);
    value = std::stoull(f[3]);
  } catch (const std::exception&) {
    bad("bad number");
  }
  if (seq <= seq_) bad("sequence not increasing");
  seq_ = seq;
  const std::string& op = f[1];
  const std::string& id = f[2];
  if (op == "ISSUE") {
    if (cards_.count(id) || value == 0) bad("duplicate or zero-value card");
    cards_[id] = PrepaidCard{id, value, CardStatus::generated, std::nullopt};
  } else if (op == "DIST") {
    auto it = cards_.find(id);
    if (it == cards_.end() || it->second.status != CardStatus::generated) bad("bad DIST");
    it->second.status = CardStatus::distributed;
  } else if (op == "SPEND") {
    auto it = cards_.find(id);
    if (it == cards_.end() || it->second.status != CardStatus::distributed) bad("bad SPEND");
    it->second.status = CardStatus::spent;
    it->second.spent_by = f[4];
    accounts_[f[4]] += it->second.value;
    spend_sequence_[id] = seq;
  } else {
    bad("unknown op " + op);
  }
}

void CardLedger::append(std::uint64_t seq, const char* op, const std::string& card_id,
                        std::uint64_t value, const std::string& account) {
  if (!log_) return;
  *log_ << seq << '\t' << op << '\t' << card_id << '\t' << value << '\t' << account << '\n';
}

void CardLedger::flush_log() {
  if (!log_) return;
  log_->flush();
  if (!*log_) throw Error(Errc::io_error, "ledger write failed");
}

std::vector<PrepaidCard> CardLedger::issue_cards(std::size_t count, std::uint64_t value) {
  if (value == 0) throw Error(Errc::invalid_argument, "card value must be positive");
  std::lock_guard lock(mu_);
  std::vector<PrepaidCard> out;
  out.reserve(count);
  while (out.size() < count) {
    std::string id = hex_encode(rng_.bytes(16));
    if (cards_.count(id)) continue;
    PrepaidCard card{id, value, CardStatus::generated, std::nullopt};
    cards_[id] = card;
    append(++seq_, "ISSUE", id, value, "-");
    out.push_back(std::move(card));
  }
  flush_log();
  return out;
}

void CardLedger::distribute(std::span<const std::string> card_ids, const std::string& store_id) {
  std::lock_guard lock(mu_);
  std::set<std::string> seen;
  for (const auto& id : card_ids) {
    auto it = cards_.find(id);
    if (it == cards_.end()) throw SpendError(Errc::unknown_card, id);
    if (it->second.status != CardStatus::generated || !seen.insert(id).second) {
      throw SpendError(Errc::already_distributed, id);
    }
  }
  for (const auto& id : card_ids) {
    cards_[id].status = CardStatus::distributed;
    append(++seq_, "DIST", id, cards_[id].value, store_id.empty() ? "-" : store_id);
  }
  flush_log();
}

SpendReceipt CardLedger::verify_and_spend(const std::string& card_id,
                                          const std::string& seller_account) {
  std::string ids[] = {card_id};
  return spend_all(ids, seller_account).front();
}

std::vector<SpendReceipt> CardLedger::spend_all(std::span<const std::string> card_ids,
                                                const std::string& seller_account) {
  if (card_ids.empty()) throw Error(Errc::invalid_argument, "no cards to spend");
  if (seller_account.empty() || seller_account.find_first_of("\t\n") != std::string::npos) {
    throw Error(Errc::invalid_argument, "bad seller account");
  }
  std::lock_guard lock(mu_);
  std::set<std::string> seen;
  for (const auto& id : card_ids) {
    auto it = cards_.find(id);
    if (it == cards_.end()) throw SpendError(Errc::unknown_card, id);
    switch (it->second.status) {
      case CardStatus::generated:
        throw SpendError(Errc::not_distributed, id);
      case CardStatus::spent:
        throw SpendError(Errc::already_spent, id, spend_sequence_.at(id));
      case CardStatus::distributed:
        break;
    }
    // The same card twice in one request is a double spend too.
    if (!seen.insert(id).second) throw SpendError(Errc::already_spent, id);
  }
  std::vector<SpendReceipt> receipts;
  receipts.reserve(card_ids.size());
  for (const auto& id : card_ids) {
    auto& card = cards_[id];
    card.status = CardStatus::spent;
    card.spent_by = seller_account;
    accounts_[seller_account] += card.value;
    std::uint64_t seq = ++seq_;
    spend_sequence_[id] = seq;
    append(seq, "SPEND", id, card.value, seller_account);
    receipts.push_back({id, seller_account, card.value, seq});
  }
  flush_log();
  return receipts;
}

std::uint64_t CardLedger::balance(const std::string& seller_account) const {
  std::lock_guard lock(mu_);
  auto it = accounts_.find(seller_account);
  return it == accounts_.end() ? 0 : it->second;
}

std::optional<PrepaidCard> CardLedger::card(const std::string& card_id) const {
  std::lock_guard lock(mu_);
  auto it = cards_.find(card_id);
  if (it == cards_.end()) return std::nullopt;
  return it->second;
}

std::size_t CardLedger::card_count() const {
  std::lock_guard lock(mu_);
  return cards_.size();
}

std::uint64_t CardLedger::sequence() const {
  std::lock_guard lock(mu_);
  return seq_;
}

std::uint64_t CardLedger::total_spent_value() const {
  std::lock_guard lock(mu_);
  std::uint64_t total = 0;
  for (const auto& [id, card] : cards_) {
    if (card.status == CardStatus::spent) total += card.value;
  }
  return total;
}

std::uint64_t CardLedger::total_balances() const {
  std::lock_guard lock(mu_);
  std::uint64_t total = 0;
  for (const auto& [account, bal] : accounts_) total += bal;
  return total;
}

bool CardLedger::conservation_holds() const {
  std::lock_guard lock(mu_);
  std::uint64_t spent = 0;
  for (const auto& [id, card] : cards_) {
    if (card.status == CardStatus::spent) spent += card.value;
  }
  std::uint64_t balances = 0;
  for (const auto& [account, bal] : accounts_) balances += bal;
  return spent == balances;
}

}  // namespace blinddrm
