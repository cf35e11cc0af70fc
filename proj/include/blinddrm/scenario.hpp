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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blinddrm/dispute.hpp"
#include "blinddrm/metrics.hpp"
#include "blinddrm/purchase.hpp"

namespace blinddrm {

enum class TransportKind { memory, socket };

enum class FaultKind { corrupt_signature, wrong_terms, wrong_s, double_spend };

struct Fault {
  FaultKind kind;
  std::size_t step = 0;  // 1-based; unused for wrong_terms
  bool operator==(const Fault&) const = default;
};

/// How the store denominates the buyer's cards: one unit each, or one card
/// per planned step worth exactly that step.
enum class CardPlan { unit, matched };

/// One reproducible run. Text form is `key: value` lines in any order:
///
///   mode: enhanced
///   price: 13
///   refresh: 0
///   group_bits: 64
///   seed: 7
///   transport: socket
///   fault: wrong-s@2
///   dispute_methods: 1,2,3
struct Scenario {
  Mode mode = Mode::basic;
  std::uint64_t price = 1;
  bool refresh_blinding = true;
  unsigned group_bits = 64;
  std::uint64_t seed = 1;
  TransportKind transport = TransportKind::memory;
  std::vector<Fault> faults;
  std::vector<DMethod> dispute_methods = {DMethod::proof, DMethod::chain, DMethod::reveal};
  /// Arbitrate a type-D case even when the purchase went through.
  bool force_dispute = false;
  /// Unset: unit for basic, matched for enhanced.
  std::optional<CardPlan> cards;

  CardPlan card_plan() const;
  std::optional<Fault> fault(FaultKind kind) const;

  std::string serialize() const;
  /// Throws Errc::scenario_invalid.
  static Scenario parse(std::string_view text);
  /// Throws Errc::scenario_invalid.
  void validate() const;
};

enum class RunStatus { completed, protocol_failure, dispute };

struct ScenarioResult {
  RunStatus status = RunStatus::completed;
  bool purchase_complete = false;
  bool key_correct = false;
  bool license_decrypted = false;
  std::optional<std::string> failure;  // first protocol error, if any
  std::vector<std::pair<std::string, Verdict>> verdicts;  // label, verdict
  std::vector<std::uint64_t> plan;
  std::uint64_t seller_balance = 0;
  std::uint64_t cards_spent_value = 0;
  bool conservation = false;
  /// Seller counters for the step rejected by a double-spend fault.
  std::optional<Metrics> replayed_step_seller;
  /// Purchase phase only; disputes are charged to the arbitrator.
  std::map<std::string, Metrics> metrics;
  std::string report;

  /// 0 success, 1 protocol failure, 3 dispute raised.
  int exit_code() const;
};

/// Actor names in metrics output order.
const std::vector<std::string>& actor_names();

/// Throws Errc::scenario_invalid for an inconsistent scenario.
ScenarioResult run_scenario(const Scenario& sc);

/// One line per actor and counter: actor<TAB>counter<TAB>value.
std::string metrics_tsv(const std::map<std::string, Metrics>& metrics);

}  // namespace blinddrm
