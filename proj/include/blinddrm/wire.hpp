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

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "blinddrm/bytes.hpp"
#include "blinddrm/errors.hpp"

namespace blinddrm {

enum class MsgType : std::uint8_t {
  card_issue = 1,
  card_distribute = 2,
  card_spend = 3,
  spend_ok = 4,
  spend_err = 5,
  step_req = 6,
  step_resp = 7,
  step_err = 8,
  catalog_get = 9,
  catalog = 10,
  dispute_values_req = 16,
  dispute_values = 17,
  dispute_proof_req = 18,
  dispute_proof = 19,
  dispute_key_req = 20,
  dispute_chain = 21,
  dispute_secret_req = 22,
  dispute_secret = 23,
};

inline constexpr std::size_t kMaxFrame = 1u << 20;
/// Card ids travel as 16 raw bytes; in memory they are 32 lowercase hex digits.
inline constexpr std::size_t kCardIdBytes = 16;

// Group elements and exponents are carried as plain integers. Membership is
// checked by whoever interprets them, against the parameters it trusts.
namespace msg {

struct WireCard {
  std::string card_id;
  std::uint64_t value = 0;
  bool operator==(const WireCard&) const = default;
};

struct WireReceipt {
  std::string card_id;
  std::uint64_t value = 0;
  std::uint64_t sequence = 0;
  bool operator==(const WireReceipt&) const = default;
};

struct WireStep {
  mpz_class q;
  mpz_class n;
  std::uint64_t power = 0;
  bool operator==(const WireStep&) const = default;
};

struct WireProof {
  mpz_class commitment_a;
  mpz_class commitment_b;
  mpz_class challenge;
  mpz_class response;
  bool operator==(const WireProof&) const = default;
};

/// Store asks the bank to mint cards and hand them to it.
struct CardIssue {
  std::string store_id;
  std::uint32_t count = 0;
  std::uint64_t value = 0;
  bool operator==(const CardIssue&) const = default;
};
struct CardDistribute {
  std::string store_id;
  std::vector<WireCard> cards;
  bool operator==(const CardDistribute&) const = default;
};
struct CardSpend {
  std::string seller_account;
  std::vector<std::string> card_ids;
  bool operator==(const CardSpend&) const = default;
};
struct SpendOk {
  std::vector<WireReceipt> receipts;
  bool operator==(const SpendOk&) const = default;
};
struct SpendErr {
  Errc code = Errc::invalid_argument;
  std::string card_id;  // empty when not card specific
  std::optional<std::uint64_t> prior_sequence;
  std::string message;
  bool operator==(const SpendErr&) const = default;
};
struct StepReq {
  std::vector<std::string> card_ids;
  mpz_class m;
  bool operator==(const StepReq&) const = default;
};
struct StepResp {
  mpz_class m_out;
  Bytes signature;
  bool operator==(const StepResp&) const = default;
};
/// Generic refusal from the seller, for steps and dispute queries alike.
struct StepErr {
  Errc code = Errc::invalid_argument;
  std::string message;
  bool operator==(const StepErr&) const = default;
};
struct CatalogGet {
  bool operator==(const CatalogGet&) const = default;
};
struct CatalogText {
  std::string text;
  bool operator==(const CatalogText&) const = default;
};
struct DisputeValuesReq {
  mpz_class q;
  std::uint64_t power = 0;
  bool operator==(const DisputeValuesReq&) const = default;
};
struct DisputeValues {
  mpz_class n;
  Bytes signature;
  bool operator==(const DisputeValues&) const = default;
};
struct DisputeProofReq {
  WireStep step;
  bool operator==(const DisputeProofReq&) const = default;
};
struct DisputeProof {
  WireProof proof;
  bool operator==(const DisputeProof&) const = default;
};
struct DisputeKeyReq {
  std::string license_id;
  std::vector<WireStep> steps;
  bool operator==(const DisputeKeyReq&) const = default;
};
struct DisputeChain {
  std::vector<mpz_class> chain;
  std::vector<WireProof> link_proofs;
  std::vector<WireProof> step_proofs;
  bool operator==(const DisputeChain&) const = default;
};
struct DisputeSecretReq {
  bool operator==(const DisputeSecretReq&) const = default;
};
struct DisputeSecret {
  mpz_class s;
  bool operator==(const DisputeSecret&) const = default;
};

}  // namespace msg

using Message =
    std::variant<msg::CardIssue, msg::CardDistribute, msg::CardSpend, msg::SpendOk, msg::SpendErr,
                 msg::StepReq, msg::StepResp, msg::StepErr, msg::CatalogGet, msg::CatalogText,
                 msg::DisputeValuesReq, msg::DisputeValues, msg::DisputeProofReq,
                 msg::DisputeProof, msg::DisputeKeyReq, msg::DisputeChain, msg::DisputeSecretReq,
                 msg::DisputeSecret>;

MsgType message_type(const Message& m);
const char* message_type_name(MsgType type);

/// Type byte followed by the body. Throws Errc::invalid_argument for values
/// that have no encoding (bad card id, oversize payload).
Bytes encode_message(const Message& m);
/// Accepts arbitrary bytes. Throws DecodeError (malformed_message or
/// unknown_type) with the failing offset.
Message decode_message(ByteView payload);

/// 4-byte big-endian length, then the payload.
Bytes encode_frame(const Message& m);
/// One complete frame, nothing after it.
Message decode_frame(ByteView frame);

/// Reassembles frames from arbitrarily split input.
class FrameAssembler {
 public:
  void feed(ByteView chunk);
  /// Next complete payload, if any. Throws DecodeError(oversize_frame) as
  /// soon as a length prefix exceeds kMaxFrame.
  std::optional<Bytes> next();
  std::size_t buffered() const { return buf_.size() - pos_; }

 private:
  Bytes buf_;
  std::size_t pos_ = 0;
};

/// Protocol payload in bits, framing and length prefixes excluded: 128 per
/// card id, `group_bits` per group element, the signature's width. Zero for
/// anything but STEP_REQ and STEP_RESP.
std::uint64_t payload_bits(const Message& m, unsigned group_bits);

struct MessageSchema {
  MsgType type;
  std::vector<std::string> fields;
};
/// Every message type with its field names, for format audits.
const std::vector<MessageSchema>& message_schema();

}  // namespace blinddrm
