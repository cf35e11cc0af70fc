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

#include "blinddrm/catalog.hpp"

#include <algorithm>

#include "blinddrm/errors.hpp"
#include "blinddrm/kvtext.hpp"

namespace blinddrm {

namespace {

constexpr std::string_view kCatalogMagic = "blinddrm-catalog";
constexpr std::string_view kKeysMagic = "blinddrm-seller-keys";

GroupElement parse_element(KvReader& r, std::string_view key, const GroupParams& params) {
  std::string v = r.take(key);
  mpz_class value;
  try {
    value = from_hex(v);
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not a hex integer");
  }
  if (!params.contains(value)) r.fail("field '" + std::string(key) + "' is not a group element");
  return GroupElement::trusted(value);
}

Bytes parse_base64(KvReader& r, std::string_view key) {
  std::string v = r.take(key);
  try {
    return base64_decode(v);
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not canonical base64");
  }
}

mpz_class parse_hex(KvReader& r, std::string_view key) {
  std::string v = r.take(key);
  try {
    return from_hex(v);
  } catch (const Error&) {
    r.fail("field '" + std::string(key) + "' is not a canonical hex integer");
  }
}

}  // namespace

std::string SellerKeys::serialize() const {
  KvWriter w;
  w.put(kKeysMagic, 1)
      .put("s", to_hex(s.value()))
      .put("sign.n", to_hex(sign_sk.modulus))
      .put("sign.e", to_hex(sign_sk.public_exponent))
      .put("sign.d", to_hex(sign_sk.private_exponent));
  return w.str();
}

SellerKeys SellerKeys::parse(std::string_view text, const GroupParams& params) {
  KvReader r(text);
  if (r.take_u64(kKeysMagic) != 1) r.fail("unsupported keys version");
  mpz_class s = parse_hex(r, "s");
  if (s < 2 || s >= params.order()) r.fail("s out of range for this group");
  SigningKey sk;
  sk.modulus = parse_hex(r, "sign.n");
  sk.public_exponent = parse_hex(r, "sign.e");
  sk.private_exponent = parse_hex(r, "sign.d");
  r.expect_end();
  return {Exponent(params, s), sk, sk.verify_key()};
}

const LicenseEntry* Catalog::find(std::string_view license_id) const {
  for (const auto& l : licenses) {
    if (l.license_id == license_id) return &l;
  }
  return nullptr;
}

const LicenseEntry& Catalog::license(std::string_view license_id) const {
  const LicenseEntry* l = find(license_id);
  if (!l) throw Error(Errc::invalid_argument, "unknown license '" + std::string(license_id) + "'");
  return *l;
}

const GroupElement& Catalog::k(std::uint64_t power) const {
  auto it = k_table.find(power);
  if (it == k_table.end()) {
    throw Error(Errc::missing_k_power, "K_" + std::to_string(power) + " is not published");
  }
  return it->second;
}

std::set<std::uint64_t> Catalog::powers() const {
  std::set<std::uint64_t> out;
  for (const auto& [t, k] : k_table) out.insert(t);
  return out;
}

Bytes Catalog::header_payload() const {
  ByteWriter w;
  w.text("blinddrm/catalog-header/v1");
  params.encode_to(w);
  w.bytes(verify_pk.to_bytes());
  w.u32(static_cast<std::uint32_t>(k_table.size()));
  for (const auto& [t, k] : k_table) {
    w.u64(t);
    k.encode_to(w);
  }
  return w.take();
}

std::string Catalog::serialize() const {
  KvWriter w;
  w.put(kCatalogMagic, 1)
      .put("group.n", to_hex(params.modulus()))
      .put("group.g", to_hex(params.generator().value()))
      .put("verify_pk", base64_encode(verify_pk.to_bytes()));
  for (const auto& [t, k] : k_table) {
    w.put("k." + std::to_string(t), to_hex(k.value()));
  }
  w.put("header_signature", base64_encode(header_signature));
  for (const auto& l : licenses) {
    w.put("license.id", l.license_id)
        .put("license.content", l.content_id)
        .put("license.price", l.price)
        .put("license.x", to_hex(l.x.value()))
        .put("license.terms", l.terms)
        .put("license.blob", base64_encode(l.encrypted_license))
        .put("license.signature", base64_encode(l.terms_signature));
  }
  return w.str();
}

Catalog Catalog::parse(std::string_view text) {
  KvReader r(text);
  if (r.take_u64(kCatalogMagic) != 1) r.fail("unsupported catalog version");
  mpz_class n = parse_hex(r, "group.n");
  mpz_class g = parse_hex(r, "group.g");
  std::optional<GroupParams> params;
  try {
    params.emplace(n, g);
  } catch (const Error& e) {
    r.fail(std::string("invalid group: ") + e.what());
  }
  Bytes pk_bytes = parse_base64(r, "verify_pk");
  std::optional<VerifyKey> pk;
  try {
    pk = VerifyKey::from_bytes(pk_bytes);
  } catch (const Error&) {
    r.fail("malformed verify_pk");
  }

  std::map<std::uint64_t, GroupElement> k_table;
  while (r.next_key().starts_with("k.")) {
    std::string key(r.next_key());
    std::string digits = key.substr(2);
    if (digits.empty() || digits.size() > 19 ||
        digits.find_first_not_of("0123456789") != std::string::npos || digits[0] == '0') {
      r.fail("bad K-table key '" + key + "'");
    }
    std::uint64_t t = std::stoull(digits);
    if (!k_table.empty() && t <= k_table.rbegin()->first) r.fail("K-table powers not increasing");
    k_table.emplace(t, parse_element(r, key, *params));
  }
  if (!k_table.count(1)) r.fail("K_1 missing");
  Bytes header_signature = parse_base64(r, "header_signature");

  std::vector<LicenseEntry> licenses;
  while (!r.at_end()) {
    std::string id = r.take("license.id");
    std::string content = r.take("license.content");
    std::uint64_t price = r.take_u64("license.price");
    if (price == 0) r.fail("license price must be positive");
    GroupElement x = parse_element(r, "license.x", *params);
    std::string terms = r.take("license.terms");
    Bytes blob = parse_base64(r, "license.blob");
    Bytes sig = parse_base64(r, "license.signature");
    for (const auto& l : licenses) {
      if (l.license_id == id) r.fail("duplicate license id '" + id + "'");
    }
    licenses.push_back({std::move(id), std::move(content), price, std::move(x), std::move(terms),
                        std::move(blob), std::move(sig)});
  }
  return Catalog{*params, *pk, std::move(k_table), std::move(header_signature),
                 std::move(licenses)};
}

std::vector<std::uint64_t> default_k_powers(std::uint64_t max_price) {
  std::vector<std::uint64_t> out;
  if (max_price == 0) return out;
  for (std::uint64_t t = 1; t != 0 && t <= max_price; t <<= 1) out.push_back(t);
  return out;
}

unsigned signature_bits_for(const GroupParams& params) {
  unsigned bits = std::max(params.bits(), kMinSignatureBits);
  return bits + (bits % 2);
}

GroupElement derive_license_key(const GroupElement& x, std::uint64_t price, const Exponent& s,
                                const GroupParams& params) {
  if (price == 0) throw Error(Errc::invalid_argument, "price must be positive");
  return pow_mod(x, exp_pow(s, price, params), params);
}

namespace {

Bytes terms_payload(std::string_view terms, ByteView encrypted_license) {
  ByteWriter w;
  w.text("blinddrm/terms/v1").text(terms).bytes(encrypted_license);
  return w.take();
}

}  // namespace

Bytes sign_terms(const SellerKeys& keys, std::string_view terms, ByteView encrypted_license) {
  return sign(keys.sign_sk, terms_payload(terms, encrypted_license));
}

bool verify_terms(const VerifyKey& pk, std::string_view terms, ByteView encrypted_license,
                  ByteView signature) {
  return verify(pk, terms_payload(terms, encrypted_license), signature);
}

SellerSetup setup(const GroupParams& params, const std::vector<LicenseSpec>& specs, Rng& rng,
                  const SetupOptions& options) {
  if (specs.empty()) throw Error(Errc::invalid_argument, "catalog needs at least one license");
  std::uint64_t max_price = 1;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    if (specs[i].price == 0) throw Error(Errc::invalid_argument, "license price must be positive");
    for (std::size_t j = 0; j < i; ++j) {
      if (specs[j].license_id == specs[i].license_id) {
        throw Error(Errc::invalid_argument, "duplicate license id '" + specs[i].license_id + "'");
      }
    }
    max_price = std::max(max_price, specs[i].price);
  }
  if (params.order() < 3) throw Error(Errc::invalid_argument, "group too small");

  unsigned sig_bits = options.signature_bits ? options.signature_bits : signature_bits_for(params);
  SigningKey sk = generate_signing_key(sig_bits, rng);
  SellerKeys keys{Exponent::trusted(rng.between(2, params.order() - 1)), sk, sk.verify_key()};

  std::map<std::uint64_t, GroupElement> k_table;
  std::vector<std::uint64_t> powers = default_k_powers(max_price);
  powers.insert(powers.end(), options.extra_powers.begin(), options.extra_powers.end());
  for (std::uint64_t t : powers) {
    if (t == 0) throw Error(Errc::invalid_argument, "K-table power must be positive");
    if (!k_table.count(t)) {
      k_table.emplace(t, pow_mod(params.generator(), exp_pow(keys.s, t, params), params));
    }
  }

  std::vector<LicenseEntry> entries;
  entries.reserve(specs.size());
  for (const auto& spec : specs) {
    const std::string& label = spec.x_label.empty() ? spec.license_id : spec.x_label;
    GroupElement x = hash_to_group("blinddrm/license-factor/" + label, params);
    GroupElement key = derive_license_key(x, spec.price, keys.s, params);
    Bytes blob = encrypt_license(key, spec.plaintext, rng);
    Bytes sig = sign_terms(keys, spec.terms, blob);
    entries.push_back({spec.license_id, spec.content_id, spec.price, std::move(x), spec.terms,
                       std::move(blob), std::move(sig)});
  }

  Catalog catalog{params, keys.verify_pk, std::move(k_table), {}, std::move(entries)};
  catalog.header_signature = sign(keys.sign_sk, catalog.header_payload());
  return {std::move(keys), std::move(catalog)};
}

std::vector<std::string> verify_catalog(const Catalog& catalog) {
  std::vector<std::string> problems;
  if (!verify(catalog.verify_pk, catalog.header_payload(), catalog.header_signature)) {
    problems.push_back("header signature does not verify");
  }
  if (!catalog.k_table.count(1)) problems.push_back("K_1 is not published");
  for (const auto& [t, k] : catalog.k_table) {
    if (!catalog.params.contains(k.value()) || k.value() == 1) {
      problems.push_back("K_" + std::to_string(t) + " is not a non-trivial group element");
    }
  }
  std::uint64_t max_price = 0;
  for (const auto& l : catalog.licenses) {
    max_price = std::max(max_price, l.price);
    if (!catalog.params.contains(l.x.value()) || l.x.value() == 1) {
      problems.push_back("license " + l.license_id + ": x is not a non-trivial group element");
    }
    if (!verify_terms(catalog.verify_pk, l.terms, l.encrypted_license, l.terms_signature)) {
      problems.push_back("license " + l.license_id + ": terms signature does not verify");
    }
  }
  for (std::uint64_t t : default_k_powers(max_price)) {
    if (!catalog.k_table.count(t)) {
      problems.push_back("K_" + std::to_string(t) + " missing for the listed prices");
    }
  }
  return problems;
}

}  // namespace blinddrm
