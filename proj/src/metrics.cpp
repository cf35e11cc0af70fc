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

#include "blinddrm/metrics.hpp"

namespace blinddrm {

namespace {
thread_local MetricsCounters* tls_counters = nullptr;
}

std::vector<std::pair<std::string, std::uint64_t>> Metrics::fields() const {
  return {
      {"exponentiations", exponentiations},
      {"divisions", divisions},
      {"signings", signings},
      {"verifications", verifications},
      {"operation_total", operation_total()},
      {"messages_sent", messages_sent},
      {"bytes_sent", bytes_sent},
      {"step_payload_bits", step_payload_bits},
  };
}

Metrics Metrics::since(const Metrics& earlier) const {
  Metrics m;
  m.exponentiations = exponentiations - earlier.exponentiations;
  m.divisions = divisions - earlier.divisions;
  m.signings = signings - earlier.signings;
  m.verifications = verifications - earlier.verifications;
  m.messages_sent = messages_sent - earlier.messages_sent;
  m.bytes_sent = bytes_sent - earlier.bytes_sent;
  m.step_payload_bits = step_payload_bits - earlier.step_payload_bits;
  return m;
}

Metrics MetricsCounters::snapshot() const {
  Metrics m;
  m.exponentiations = exponentiations_.load();
  m.divisions = divisions_.load();
  m.signings = signings_.load();
  m.verifications = verifications_.load();
  m.messages_sent = messages_sent_.load();
  m.bytes_sent = bytes_sent_.load();
  m.step_payload_bits = step_payload_bits_.load();
  return m;
}

void MetricsCounters::reset() {
  exponentiations_ = 0;
  divisions_ = 0;
  signings_ = 0;
  verifications_ = 0;
  messages_sent_ = 0;
  bytes_sent_ = 0;
  step_payload_bits_ = 0;
}

MetricsScope::MetricsScope(MetricsCounters* counters) : previous_(tls_counters) {
  tls_counters = counters;
}

MetricsScope::~MetricsScope() { tls_counters = previous_; }

MetricsCounters* MetricsScope::current() { return tls_counters; }

namespace count {

void exponentiation() {
  if (tls_counters) tls_counters->add_exponentiation();
}
void division() {
  if (tls_counters) tls_counters->add_division();
}
void signing() {
  if (tls_counters) tls_counters->add_signing();
}
void verification() {
  if (tls_counters) tls_counters->add_verification();
}

}  // namespace count

}  // namespace blinddrm
