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

#include <atomic>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace blinddrm {

/// Snapshot of one actor's operation counters.
struct Metrics {
  std::uint64_t exponentiations = 0;
  std::uint64_t divisions = 0;
  std::uint64_t signings = 0;
  std::uint64_t verifications = 0;
  std::uint64_t messages_sent = 0;
  std::uint64_t bytes_sent = 0;
  /// Field-level payload of purchase-step messages, excluding framing,
  /// length prefixes and type tags.
  std::uint64_t step_payload_bits = 0;

  /// Exponentiations + divisions + signings, the cost model of the
  /// computation tables.
  std::uint64_t operation_total() const {
    return exponentiations + divisions + signings;
  }

  std::vector<std::pair<std::string, std::uint64_t>> fields() const;
  /// Counts accumulated since `earlier`.
  Metrics since(const Metrics& earlier) const;
  bool operator==(const Metrics&) const = default;
};

/// Thread-safe live counters for one actor.
class MetricsCounters {
 public:
  void add_exponentiation() { exponentiations_.fetch_add(1, std::memory_order_relaxed); }
  void add_division() { divisions_.fetch_add(1, std::memory_order_relaxed); }
  void add_signing() { signings_.fetch_add(1, std::memory_order_relaxed); }
  void add_verification() { verifications_.fetch_add(1, std::memory_order_relaxed); }
  void add_message(std::uint64_t bytes, std::uint64_t payload_bits) {
    messages_sent_.fetch_add(1, std::memory_order_relaxed);
    bytes_sent_.fetch_add(bytes, std::memory_order_relaxed);
    step_payload_bits_.fetch_add(payload_bits, std::memory_order_relaxed);
  }

  Metrics snapshot() const;
  void reset();

 private:
  std::atomic<std::uint64_t> exponentiations_{0};
  std::atomic<std::uint64_t> divisions_{0};
  std::atomic<std::uint64_t> signings_{0};
  std::atomic<std::uint64_t> verifications_{0};
  std::atomic<std::uint64_t> messages_sent_{0};
  std::atomic<std::uint64_t> bytes_sent_{0};
  std::atomic<std::uint64_t> step_payload_bits_{0};
};

/// Routes the counting hooks of the calling thread to `counters` for the
/// lifetime of the scope. Scopes nest; nullptr disables counting.
class MetricsScope {
 public:
  explicit MetricsScope(MetricsCounters* counters);
  ~MetricsScope();
  MetricsScope(const MetricsScope&) = delete;
  MetricsScope& operator=(const MetricsScope&) = delete;

  static MetricsCounters* current();

 private:
  MetricsCounters* previous_;
};

namespace count {
void exponentiation();
void division();
void signing();
void verification();
}  // namespace count

}  // namespace blinddrm
