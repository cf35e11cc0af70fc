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
#include <string>
#include <vector>

#include "blinddrm/metrics.hpp"
#include "blinddrm/purchase.hpp"
#include "blinddrm/scenario.hpp"

namespace blinddrm {

/// Card id width in bits, the per-card term of the bandwidth formulas.
inline constexpr std::uint64_t kCardIdBits = 128;

std::uint64_t ceil_log2(std::uint64_t p);

struct SweepOptions {
  Mode mode = Mode::basic;
  std::vector<std::uint64_t> prices = {1, 2, 4, 8, 16, 31};
  unsigned group_bits = 64;
  std::uint64_t seed = 1;
  TransportKind transport = TransportKind::memory;
};

struct SweepRow {
  std::uint64_t price = 0;
  std::size_t steps = 0;
  Metrics buyer;
  Metrics seller;
  bool buyer_ops_ok = false;
  bool seller_ops_ok = false;
  bool messages_ok = false;
  bool buyer_bits_ok = false;
  bool seller_bits_ok = false;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::string table;
  bool all_pass = true;
};

/// Runs one fault-free purchase per price (single blinding factor, the
/// protocol as originally stated) and compares the counters with the
/// closed-form costs. Basic mode: buyer p+2 and seller 2p operations,
/// p(card+group) and 2p*group payload bits. Enhanced mode: buyer at most
/// 1+2*ceil(log2 p), seller at most p+ceil(log2 p), popcount(p) messages,
/// payload as basic with p replaced by the message count.
SweepResult report_tables(const SweepOptions& options);

}  // namespace blinddrm
