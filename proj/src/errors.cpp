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

#include "blinddrm/errors.hpp"

namespace blinddrm {

const char* errc_name(Errc code) {
  switch (code) {
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::malformed_element: return "malformed-element";
    case Errc::unknown_card: return "unknown-card";
    case Errc::already_distributed: return "already-distributed";
    case Errc::already_spent: return "already-spent";
    case Errc::not_distributed: return "not-distributed";
    case Errc::insufficient_funds: return "insufficient-funds";
    case Errc::missing_k_power: return "missing-k-power";
    case Errc::session_complete: return "session-complete";
    case Errc::incomplete_session: return "incomplete-session";
    case Errc::bad_signature: return "bad-signature";
    case Errc::authentication_failure: return "authentication-failure";
    case Errc::mismatched_factor: return "mismatched-factor";
    case Errc::nothing_to_upgrade: return "nothing-to-upgrade";
    case Errc::malformed_evidence: return "malformed-evidence";
    case Errc::seller_unresponsive: return "seller-unresponsive";
    case Errc::chain_length_mismatch: return "chain-length-mismatch";
    case Errc::commitment_mismatch: return "commitment-mismatch";
    case Errc::malformed_message: return "malformed-message";
    case Errc::unknown_type: return "unknown-type";
    case Errc::oversize_frame: return "oversize-frame";
    case Errc::connection_closed: return "connection-closed";
    case Errc::timeout: return "timeout";
    case Errc::parse_error: return "parse-error";
    case Errc::io_error: return "io-error";
    case Errc::scenario_invalid: return "scenario-invalid";
  }
  return "unknown";
}

}  // namespace blinddrm
