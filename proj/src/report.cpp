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

#include "blinddrm/report.hpp"

#include <bit>
#include <iomanip>
#include <sstream>

namespace blinddrm {

std::uint64_t ceil_log2(std::uint64_t p) {
  if (p <= 1) return 0;
  return std::bit_width(p - 1);
}

namespace {

class Table {
 public:
  explicit Table(std::vector<std::string> header) { rows_.push_back(std::move(header)); }
  void add(std::vector<std::string> row) { rows_.push_back(std::move(row)); }

  std::string render() const {
    std::vector<std::size_t> width(rows_.front().size(), 0);
    for (const auto& r : rows_) {
      for (std::size_t i = 0; i < r.size(); ++i) width[i] = std::max(width[i], r[i].size());
    }
    std::ostringstream out;
    for (std::size_t n = 0; n < rows_.size(); ++n) {
      for (std::size_t i = 0; i < rows_[n].size(); ++i) {
        out << (i ? "  " : "") << std::setw(static_cast<int>(width[i])) << rows_[n][i];
      }
      out << '\n';
      if (n == 0) {
        std::size_t total = 0;
        for (auto w : width) total += w + 2;
        out << std::string(total - 2, '-') << '\n';
      }
    }
    return out.str();
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

std::string num(std::uint64_t v) { return std::to_string(v); }
std::string verdict(bool ok) { return ok ? "pass" : "FAIL"; }

}  // namespace

SweepResult report_tables(const SweepOptions& options) {
  const bool basic = options.mode == Mode::basic;
  const std::uint64_t gamma = options.group_bits;
  SweepResult result;

  Table table(basic ? std::vector<std::string>{"p", "buyer_ops", "p+2", "", "seller_ops", "2p", "",
                                               "buyer_bits", "p(b+g)", "", "seller_bits", "2pg", "",
                                               "buyer_wire_B", "seller_wire_B"}
                    : std::vector<std::string>{"p", "buyer_ops", "<=1+2log", "", "seller_ops",
                                               "<=p+log", "", "msgs", "popcount", "",
                                               "buyer_bits", "L(b+g)", "", "seller_bits", "2Lg", "",
                                               "buyer_wire_B", "seller_wire_B"});

  for (std::uint64_t p : options.prices) {
    Scenario sc;
    sc.mode = options.mode;
    sc.price = p;
    sc.refresh_blinding = false;
    sc.group_bits = options.group_bits;
    sc.seed = options.seed;
    sc.transport = options.transport;
    ScenarioResult run = run_scenario(sc);

    SweepRow row;
    row.price = p;
    row.steps = run.plan.size();
    row.buyer = run.metrics["buyer"];
    row.seller = run.metrics["seller"];
    const std::uint64_t steps = row.steps;
    const std::uint64_t log = ceil_log2(p);
    const bool clean = run.status == RunStatus::completed && run.key_correct;

    std::uint64_t buyer_bound = basic ? p + 2 : 1 + 2 * log;
    std::uint64_t seller_bound = basic ? 2 * p : p + log;
    std::uint64_t messages = static_cast<std::uint64_t>(std::popcount(p));
    std::uint64_t buyer_bits = steps * (kCardIdBits + gamma);
    std::uint64_t seller_bits = 2 * steps * gamma;

    if (basic) {
      row.buyer_ops_ok = row.buyer.operation_total() == buyer_bound;
      row.seller_ops_ok = row.seller.operation_total() == seller_bound;
      row.messages_ok = row.buyer.messages_sent == p;
    } else {
      row.buyer_ops_ok = row.buyer.operation_total() <= buyer_bound;
      row.seller_ops_ok = row.seller.operation_total() <= seller_bound;
      row.messages_ok = row.buyer.messages_sent == messages && messages <= log + 1;
    }
    row.buyer_bits_ok = row.buyer.step_payload_bits == buyer_bits;
    row.seller_bits_ok = row.seller.step_payload_bits == seller_bits;
    result.all_pass = result.all_pass && clean && row.buyer_ops_ok && row.seller_ops_ok &&
                      row.messages_ok && row.buyer_bits_ok && row.seller_bits_ok;

    std::vector<std::string> cells = {num(p), num(row.buyer.operation_total()), num(buyer_bound),
                                      verdict(row.buyer_ops_ok && clean),
                                      num(row.seller.operation_total()), num(seller_bound),
                                      verdict(row.seller_ops_ok)};
    if (!basic) {
      cells.insert(cells.end(), {num(row.buyer.messages_sent), num(messages), verdict(row.messages_ok)});
    }
    cells.insert(cells.end(), {num(row.buyer.step_payload_bits), num(buyer_bits),
                               verdict(row.buyer_bits_ok), num(row.seller.step_payload_bits),
                               num(seller_bits), verdict(row.seller_bits_ok),
                               num(row.buyer.bytes_sent), num(row.seller.bytes_sent)});
    table.add(std::move(cells));
    result.rows.push_back(row);
  }

  std::ostringstream out;
  out << "mode " << mode_name(options.mode) << ", group " << gamma << " bits, card id "
      << kCardIdBits << " bits, one blinding factor per purchase\n"
      << table.render();
  if (!basic) {
    out << "seller signs once per message; the closed form charges log(p) signings\n";
  }
  result.table = out.str();
  return result;
}

}  // namespace blinddrm
