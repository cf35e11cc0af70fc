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

#include "blinddrm/wire.hpp"

#include <type_traits>

namespace blinddrm {

namespace {

template <class T>
constexpr MsgType type_of();
template <> constexpr MsgType type_of<msg::CardIssue>() { return MsgType::card_issue; }
template <> constexpr MsgType type_of<msg::CardDistribute>() { return MsgType::card_distribute; }
template <> constexpr MsgType type_of<msg::CardSpend>() { return MsgType::card_spend; }
template <> constexpr MsgType type_of<msg::SpendOk>() { return MsgType::spend_ok; }
template <> constexpr MsgType type_of<msg::SpendErr>() { return MsgType::spend_err; }
template <> constexpr MsgType type_of<msg::StepReq>() { return MsgType::step_req; }
template <> constexpr MsgType type_of<msg::StepResp>() { return MsgType::step_resp; }
template <> constexpr MsgType type_of<msg::StepErr>() { return MsgType::step_err; }
template <> constexpr MsgType type_of<msg::CatalogGet>() { return MsgType::catalog_get; }
template <> constexpr MsgType type_of<msg::CatalogText>() { return MsgType::catalog; }
template <> constexpr MsgType type_of<msg::DisputeValuesReq>() { return MsgType::dispute_values_req; }
template <> constexpr MsgType type_of<msg::DisputeValues>() { return MsgType::dispute_values; }
template <> constexpr MsgType type_of<msg::DisputeProofReq>() { return MsgType::dispute_proof_req; }
template <> constexpr MsgType type_of<msg::DisputeProof>() { return MsgType::dispute_proof; }
template <> constexpr MsgType type_of<msg::DisputeKeyReq>() { return MsgType::dispute_key_req; }
template <> constexpr MsgType type_of<msg::DisputeChain>() { return MsgType::dispute_chain; }
template <> constexpr MsgType type_of<msg::DisputeSecretReq>() { return MsgType::dispute_secret_req; }
template <> constexpr MsgType type_of<msg::DisputeSecret>() { return MsgType::dispute_secret; }

bool is_card_id(std::string_view id) {
  if (id.size() != 2 * kCardIdBytes) return false;
  for (char c : id) {
    if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
  }
  return true;
}

void put_card_id(ByteWriter& w, std::string_view id) {
  if (!is_card_id(id)) throw Error(Errc::invalid_argument, "card id '" + std::string(id) + "' is not 32 hex digits");
  w.raw(hex_decode(id));
}

std::string get_card_id(ByteReader& r) { return hex_encode(r.raw(kCardIdBytes)); }

void put_card_ids(ByteWriter& w, const std::vector<std::string>& ids) {
  w.u32(static_cast<std::uint32_t>(ids.size()));
  for (const auto& id : ids) put_card_id(w, id);
}

std::vector<std::string> get_card_ids(ByteReader& r) {
  std::uint32_t n = r.count(kCardIdBytes);
  std::vector<std::string> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(get_card_id(r));
  return out;
}

void put_errc(ByteWriter& w, Errc code) { w.u8(static_cast<std::uint8_t>(code)); }

Errc get_errc(ByteReader& r) {
  std::uint8_t v = r.u8();
  if (v > static_cast<std::uint8_t>(Errc::scenario_invalid)) r.fail("unknown error code");
  return static_cast<Errc>(v);
}

void put_step(ByteWriter& w, const msg::WireStep& s) { w.uint(s.q).uint(s.n).u64(s.power); }

msg::WireStep get_step(ByteReader& r) {
  msg::WireStep s;
  s.q = r.uint();
  s.n = r.uint();
  s.power = r.u64();
  return s;
}

void put_proof(ByteWriter& w, const msg::WireProof& p) {
  w.uint(p.commitment_a).uint(p.commitment_b).uint(p.challenge).uint(p.response);
}

msg::WireProof get_proof(ByteReader& r) {
  msg::WireProof p;
  p.commitment_a = r.uint();
  p.commitment_b = r.uint();
  p.challenge = r.uint();
  p.response = r.uint();
  return p;
}

template <class T, class Put>
void put_list(ByteWriter& w, const std::vector<T>& items, Put put) {
  w.u32(static_cast<std::uint32_t>(items.size()));
  for (const auto& item : items) put(w, item);
}

template <class Get>
auto get_list(ByteReader& r, std::size_t min_item_size, Get get) {
  std::uint32_t n = r.count(min_item_size);
  std::vector<decltype(get(r))> out;
  out.reserve(n);
  for (std::uint32_t i = 0; i < n; ++i) out.push_back(get(r));
  return out;
}

void encode_body(ByteWriter& w, const msg::CardIssue& m) { w.text(m.store_id).u32(m.count).u64(m.value); }
void encode_body(ByteWriter& w, const msg::CardDistribute& m) {
  w.text(m.store_id);
  put_list(w, m.cards, [](ByteWriter& w, const msg::WireCard& c) {
    put_card_id(w, c.card_id);
    w.u64(c.value);
  });
}
void encode_body(ByteWriter& w, const msg::CardSpend& m) {
  w.text(m.seller_account);
  put_card_ids(w, m.card_ids);
}
void encode_body(ByteWriter& w, const msg::SpendOk& m) {
  put_list(w, m.receipts, [](ByteWriter& w, const msg::WireReceipt& rc) {
    put_card_id(w, rc.card_id);
    w.u64(rc.value).u64(rc.sequence);
  });
}
void encode_body(ByteWriter& w, const msg::SpendErr& m) {
  put_errc(w, m.code);
  w.text(m.card_id);
  w.u8(m.prior_sequence ? 1 : 0);
  if (m.prior_sequence) w.u64(*m.prior_sequence);
  w.text(m.message);
}
void encode_body(ByteWriter& w, const msg::StepReq& m) {
  put_card_ids(w, m.card_ids);
  w.uint(m.m);
}
void encode_body(ByteWriter& w, const msg::StepResp& m) { w.uint(m.m_out).bytes(m.signature); }
void encode_body(ByteWriter& w, const msg::StepErr& m) {
  put_errc(w, m.code);
  w.text(m.message);
}
void encode_body(ByteWriter&, const msg::CatalogGet&) {}
void encode_body(ByteWriter& w, const msg::CatalogText& m) { w.text(m.text); }
void encode_body(ByteWriter& w, const msg::DisputeValuesReq& m) { w.uint(m.q).u64(m.power); }
void encode_body(ByteWriter& w, const msg::DisputeValues& m) { w.uint(m.n).bytes(m.signature); }
void encode_body(ByteWriter& w, const msg::DisputeProofReq& m) { put_step(w, m.step); }
void encode_body(ByteWriter& w, const msg::DisputeProof& m) { put_proof(w, m.proof); }
void encode_body(ByteWriter& w, const msg::DisputeKeyReq& m) {
  w.text(m.license_id);
  put_list(w, m.steps, put_step);
}
void encode_body(ByteWriter& w, const msg::DisputeChain& m) {
  put_list(w, m.chain, [](ByteWriter& w, const mpz_class& v) { w.uint(v); });
  put_list(w, m.link_proofs, put_proof);
  put_list(w, m.step_proofs, put_proof);
}
void encode_body(ByteWriter&, const msg::DisputeSecretReq&) {}
void encode_body(ByteWriter& w, const msg::DisputeSecret& m) { w.uint(m.s); }

// Smallest encodings, used to bound list counts by the remaining input.
constexpr std::size_t kMinUint = 4;
constexpr std::size_t kMinStep = 2 * kMinUint + 8;
constexpr std::size_t kMinProof = 4 * kMinUint;

Message decode_body(MsgType type, ByteReader& r) {
  switch (type) {
    case MsgType::card_issue: {
      msg::CardIssue m;
      m.store_id = r.text();
      m.count = r.u32();
      m.value = r.u64();
      return m;
    }
    case MsgType::card_distribute: {
      msg::CardDistribute m;
      m.store_id = r.text();
      m.cards = get_list(r, kCardIdBytes + 8, [](ByteReader& r) {
        msg::WireCard c;
        c.card_id = get_card_id(r);
        c.value = r.u64();
        return c;
      });
      return m;
    }
    case MsgType::card_spend: {
      msg::CardSpend m;
      m.seller_account = r.text();
      m.card_ids = get_card_ids(r);
      return m;
    }
    case MsgType::spend_ok: {
      msg::SpendOk m;
      m.receipts = get_list(r, kCardIdBytes + 16, [](ByteReader& r) {
        msg::WireReceipt rc;
        rc.card_id = get_card_id(r);
        rc.value = r.u64();
        rc.sequence = r.u64();
        return rc;
      });
      return m;
    }
    case MsgType::spend_err: {
      msg::SpendErr m;
      m.code = get_errc(r);
      m.card_id = r.text();
      std::uint8_t has_prior = r.u8();
      if (has_prior > 1) r.fail("bad presence flag");
      if (has_prior) m.prior_sequence = r.u64();
      m.message = r.text();
      return m;
    }
    case MsgType::step_req: {
      msg::StepReq m;
      m.card_ids = get_card_ids(r);
      m.m = r.uint();
      return m;
    }
    case MsgType::step_resp: {
      msg::StepResp m;
      m.m_out = r.uint();
      m.signature = r.bytes();
      return m;
    }
    case MsgType::step_err: {
      msg::StepErr m;
      m.code = get_errc(r);
      m.message = r.text();
      return m;
    }
    case MsgType::catalog_get: return msg::CatalogGet{};
    case MsgType::catalog: return msg::CatalogText{r.text()};
    case MsgType::dispute_values_req: {
      msg::DisputeValuesReq m;
      m.q = r.uint();
      m.power = r.u64();
      return m;
    }
    case MsgType::dispute_values: {
      msg::DisputeValues m;
      m.n = r.uint();
      m.signature = r.bytes();
      return m;
    }
    case MsgType::dispute_proof_req: return msg::DisputeProofReq{get_step(r)};
    case MsgType::dispute_proof: return msg::DisputeProof{get_proof(r)};
    case MsgType::dispute_key_req: {
      msg::DisputeKeyReq m;
      m.license_id = r.text();
      m.steps = get_list(r, kMinStep, get_step);
      return m;
    }
    case MsgType::dispute_chain: {
      msg::DisputeChain m;
      m.chain = get_list(r, kMinUint, [](ByteReader& r) { return r.uint(); });
      m.link_proofs = get_list(r, kMinProof, get_proof);
      m.step_proofs = get_list(r, kMinProof, get_proof);
      return m;
    }
    case MsgType::dispute_secret_req: return msg::DisputeSecretReq{};
    case MsgType::dispute_secret: return msg::DisputeSecret{r.uint()};
  }
  throw DecodeError(Errc::unknown_type, 0, "unknown message type");
}

bool known_type(std::uint8_t t) { return (t >= 1 && t <= 10) || (t >= 16 && t <= 23); }

std::uint32_t read_be32(const std::uint8_t* p) {
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) |
         std::uint32_t{p[3]};
}

}  // namespace

MsgType message_type(const Message& m) {
  return std::visit([](const auto& v) { return type_of<std::decay_t<decltype(v)>>(); }, m);
}

const char* message_type_name(MsgType type) {
  switch (type) {
    case MsgType::card_issue: return "CARD_ISSUE";
    case MsgType::card_distribute: return "CARD_DISTRIBUTE";
    case MsgType::card_spend: return "CARD_SPEND";
    case MsgType::spend_ok: return "SPEND_OK";
    case MsgType::spend_err: return "SPEND_ERR";
    case MsgType::step_req: return "STEP_REQ";
    case MsgType::step_resp: return "STEP_RESP";
    case MsgType::step_err: return "STEP_ERR";
    case MsgType::catalog_get: return "CATALOG_GET";
    case MsgType::catalog: return "CATALOG";
    case MsgType::dispute_values_req: return "DISPUTE_VALUES_REQ";
    case MsgType::dispute_values: return "DISPUTE_VALUES";
    case MsgType::dispute_proof_req: return "DISPUTE_PROOF_REQ";
    case MsgType::dispute_proof: return "DISPUTE_PROOF";
    case MsgType::dispute_key_req: return "DISPUTE_KEY_REQ";
    case MsgType::dispute_chain: return "DISPUTE_CHAIN";
    case MsgType::dispute_secret_req: return "DISPUTE_SECRET_REQ";
    case MsgType::dispute_secret: return "DISPUTE_SECRET";
  }
  return "?";
}

Bytes encode_message(const Message& m) {
  ByteWriter w;
  w.u8(static_cast<std::uint8_t>(message_type(m)));
  std::visit([&w](const auto& v) { encode_body(w, v); }, m);
  if (w.data().size() > kMaxFrame) {
    throw Error(Errc::oversize_frame, "message of " + std::to_string(w.data().size()) + " bytes");
  }
  return w.take();
}

Message decode_message(ByteView payload) {
  ByteReader r(payload);
  std::uint8_t t = r.u8();
  if (!known_type(t)) throw DecodeError(Errc::unknown_type, 0, "type " + std::to_string(t));
  Message m = decode_body(static_cast<MsgType>(t), r);
  r.expect_end();
  return m;
}

Bytes encode_frame(const Message& m) {
  Bytes payload = encode_message(m);
  ByteWriter w;
  w.bytes(payload);
  return w.take();
}

Message decode_frame(ByteView frame) {
  if (frame.size() < 4) throw DecodeError(Errc::malformed_message, 0, "truncated frame header");
  std::uint32_t len = read_be32(frame.data());
  if (len > kMaxFrame) throw DecodeError(Errc::oversize_frame, 0, "frame of " + std::to_string(len) + " bytes");
  if (frame.size() - 4 != len) {
    throw DecodeError(Errc::malformed_message, 4, "frame length does not match payload");
  }
  try {
    return decode_message(frame.subspan(4));
  } catch (const DecodeError& e) {
    throw DecodeError(e.code(), e.offset() + 4, "in frame payload");
  }
}

void FrameAssembler::feed(ByteView chunk) {
  if (pos_ > 0 && pos_ == buf_.size()) {
    buf_.clear();
    pos_ = 0;
  }
  buf_.insert(buf_.end(), chunk.begin(), chunk.end());
}

std::optional<Bytes> FrameAssembler::next() {
  if (buffered() < 4) return std::nullopt;
  std::uint32_t len = read_be32(buf_.data() + pos_);
  if (len > kMaxFrame) throw DecodeError(Errc::oversize_frame, 0, "frame of " + std::to_string(len) + " bytes");
  if (buffered() - 4 < len) return std::nullopt;
  Bytes payload(buf_.begin() + pos_ + 4, buf_.begin() + pos_ + 4 + len);
  pos_ += 4 + len;
  if (pos_ > (1u << 16) && pos_ * 2 > buf_.size()) {
    buf_.erase(buf_.begin(), buf_.begin() + pos_);
    pos_ = 0;
  }
  return payload;
}

std::uint64_t payload_bits(const Message& m, unsigned group_bits) {
  if (const auto* req = std::get_if<msg::StepReq>(&m)) {
    return 8 * kCardIdBytes * req->card_ids.size() + group_bits;
  }
  if (const auto* resp = std::get_if<msg::StepResp>(&m)) {
    return group_bits + 8 * resp->signature.size();
  }
  return 0;
}

const std::vector<MessageSchema>& message_schema() {
  static const std::vector<MessageSchema> schema = {
      {MsgType::card_issue, {"store_id", "count", "value"}},
      {MsgType::card_distribute, {"store_id", "cards.card_id", "cards.value"}},
      {MsgType::card_spend, {"seller_account", "card_ids"}},
      {MsgType::spend_ok, {"receipts.card_id", "receipts.value", "receipts.sequence"}},
      {MsgType::spend_err, {"code", "card_id", "prior_sequence", "message"}},
      {MsgType::step_req, {"card_ids", "m"}},
      {MsgType::step_resp, {"m_out", "signature"}},
      {MsgType::step_err, {"code", "message"}},
      {MsgType::catalog_get, {}},
      {MsgType::catalog, {"text"}},
      {MsgType::dispute_values_req, {"q", "power"}},
      {MsgType::dispute_values, {"n", "signature"}},
      {MsgType::dispute_proof_req, {"step.q", "step.n", "step.power"}},
      {MsgType::dispute_proof,
       {"proof.commitment_a", "proof.commitment_b", "proof.challenge", "proof.response"}},
      {MsgType::dispute_key_req, {"license_id", "steps.q", "steps.n", "steps.power"}},
      {MsgType::dispute_chain, {"chain", "link_proofs", "step_proofs"}},
      {MsgType::dispute_secret_req, {}},
      {MsgType::dispute_secret, {"s"}},
  };
  return schema;
}

}  // namespace blinddrm
