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
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "blinddrm/group.hpp"
#include "blinddrm/license.hpp"
#include "blinddrm/signature.hpp"

namespace blinddrm {

/// Seller secrets. Never serialized into a Catalog.
struct SellerKeys {
  Exponent s;  // license generation factor, in [2, q-1]
  SigningKey sign_sk;
  VerifyKey verify_pk;

  std::string serialize() const;
  static SellerKeys parse(std::string_view text, const GroupParams& params);
};

struct LicenseEntry {
  std::string license_id;
  std::string content_id;
  std::uint64_t price = 1;
  GroupElement x;  // public license encryption factor
  std::string terms;
  Bytes encrypted_license;
  Bytes terms_signature;
};

/// The seller's public data: group, verification key, signed K-power table
/// K_t = g^(s^t) and the license records.
struct Catalog {
  GroupParams params;
  VerifyKey verify_pk;
  std::map<std::uint64_t, GroupElement> k_table;
  Bytes header_signature;  // over header_payload()
  std::vector<LicenseEntry> licenses;

  const LicenseEntry* find(std::string_view license_id) const;
  /// Throws Errc::invalid_argument for an unknown id.
  const LicenseEntry& license(std::string_view license_id) const;
  /// Throws Errc::missing_k_power.
  const GroupElement& k(std::uint64_t power) const;
  std::set<std::uint64_t> powers() const;

  /// Canonical bytes covered by header_signature: params, verify_pk, k_table.
  Bytes header_payload() const;

  /// `key: value` text, one field per line; parse(serialize(c)) reproduces
  /// the same text byte for byte.
  std::string serialize() const;
  static Catalog parse(std::string_view text);
};

struct LicenseSpec {
  std::string license_id;
  std::string content_id;
  std::uint64_t price = 1;
  std::string terms;  // published terms
  LicensePlaintext plaintext;  // what actually gets encrypted
  /// Licenses sharing an x_label share x (upgrade paths). Empty means the
  /// license id is the label.
  std::string x_label;
};

struct SetupOptions {
  /// Powers published in addition to 1, 2, 4, ..., 2^floor(log2(max price)).
  std::vector<std::uint64_t> extra_powers;
  /// 0 selects the group width, raised to kMinSignatureBits and made even.
  unsigned signature_bits = 0;
};

struct SellerSetup {
  SellerKeys keys;
  Catalog catalog;
};

SellerSetup setup(const GroupParams& params, const std::vector<LicenseSpec>& specs, Rng& rng,
                  const SetupOptions& options = {});

/// Power-of-two K-table powers covering prices up to max_price.
std::vector<std::uint64_t> default_k_powers(std::uint64_t max_price);

unsigned signature_bits_for(const GroupParams& params);

/// C = x^(s^price mod q).
GroupElement derive_license_key(const GroupElement& x, std::uint64_t price, const Exponent& s,
                                const GroupParams& params);

Bytes sign_terms(const SellerKeys& keys, std::string_view terms, ByteView encrypted_license);
bool verify_terms(const VerifyKey& pk, std::string_view terms, ByteView encrypted_license,
                  ByteView signature);

/// Public consistency audit; returns human-readable problems, empty if none.
std::vector<std::string> verify_catalog(const Catalog& catalog);

}  // namespace blinddrm
