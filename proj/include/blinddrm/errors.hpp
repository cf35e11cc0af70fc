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
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace blinddrm {

enum class Errc {
  invalid_argument,
  malformed_element,
  // cards
  unknown_card,
  already_distributed,
  already_spent,
  not_distributed,
  // purchase
  insufficient_funds,
  missing_k_power,
  session_complete,
  incomplete_session,
  bad_signature,
  authentication_failure,
  mismatched_factor,
  nothing_to_upgrade,
  // dispute
  malformed_evidence,
  seller_unresponsive,
  chain_length_mismatch,
  commitment_mismatch,
  // wire / transport
  malformed_message,
  unknown_type,
  oversize_frame,
  connection_closed,
  timeout,
  // tooling
  parse_error,
  io_error,
  scenario_invalid,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what),
        code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Raised by every byte-level decoder; carries the offset at which input
/// stopped making sense.
class DecodeError : public Error {
 public:
  DecodeError(Errc code, std::size_t offset, const std::string& what)
      : Error(code, what + " at offset " + std::to_string(offset)),
        offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Card-ledger rejection. For double spends the prior spend's sequence
/// number is reported; the prior seller never is.
class SpendError : public Error {
 public:
  SpendError(Errc code, std::string card_id,
             std::optional<std::uint64_t> prior_sequence = std::nullopt)
      : Error(code, "card " + card_id),
        card_id_(std::move(card_id)),
        prior_sequence_(prior_sequence) {}

  const std::string& card_id() const { return card_id_; }
  std::optional<std::uint64_t> prior_sequence() const {
    return prior_sequence_;
  }

 private:
  std::string card_id_;
  std::optional<std::uint64_t> prior_sequence_;
};

}  // namespace blinddrm
