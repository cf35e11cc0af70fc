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

#include <gtest/gtest.h>

#include "blinddrm/catalog.hpp"
#include "blinddrm/errors.hpp"
#include "support.hpp"

using namespace blinddrm;
using blinddrm::testing::Market;
using blinddrm::testing::toy_params;

TEST(Catalog, DefaultPowersArePowersOfTwo) {
  EXPECT_EQ(default_k_powers(1), (std::vector<std::uint64_t>{1}));
  EXPECT_EQ(default_k_powers(8), (std::vector<std::uint64_t>{1, 2, 4, 8}));
  EXPECT_EQ(default_k_powers(31), (std::vector<std::uint64_t>{1, 2, 4, 8, 16}));
}

TEST(Catalog, ToyKeyMatchesHandComputation) {
  GroupParams p = toy_params();
  // x = 8, s = 3, price 3: exponent 3^3 mod 11 = 5, key = 8^5 mod 23 = 16.
  EXPECT_EQ(derive_license_key(GroupElement(p, 8), 3, Exponent(p, 3), p).value(), 16);
  EXPECT_THROW(derive_license_key(GroupElement(p, 8), 0, Exponent(p, 3), p), Error);
}

TEST(Catalog, SetupPublishesConsistentData) {
  Market m(gen_params(64, 4), {{"a", 3, ""}, {"b", 9, ""}}, 1);
  const Catalog& c = *m.catalog;
  EXPECT_TRUE(verify_catalog(c).empty());
  EXPECT_EQ(c.powers(), (std::set<std::uint64_t>{1, 2, 4, 8}));
  for (auto [t, k] : c.k_table) {
    EXPECT_EQ(k, pow_mod(c.params.generator(), exp_pow(m.seller.keys.s, t, c.params), c.params));
  }
  const LicenseEntry& a = c.license("a");
  EXPECT_EQ(a.x, hash_to_group("blinddrm/license-factor/a", c.params));
  GroupElement key = derive_license_key(a.x, 3, m.seller.keys.s, c.params);
  EXPECT_EQ(key.value(), m.expected_key("a", 3));
  EXPECT_EQ(decrypt_license(key, a.encrypted_license).license_id, "a");
  EXPECT_EQ(c.find("zzz"), nullptr);
  EXPECT_THROW(c.license("zzz"), Error);
  EXPECT_THROW(c.k(3), Error);
  EXPECT_GE(c.verify_pk.bits(), kMinSignatureBits);
  EXPECT_EQ(signature_bits_for(c.params), 64u);
  EXPECT_EQ(signature_bits_for(gen_params(90, 1)), 90u);
}

TEST(Catalog, SharedLabelSharesTheFactor) {
  Market m(gen_params(48, 2), {{"two", 2, "song"}, {"five", 5, "song"}, {"solo", 5, ""}}, 2);
  EXPECT_EQ(m.catalog->license("two").x, m.catalog->license("five").x);
  EXPECT_NE(m.catalog->license("five").x, m.catalog->license("solo").x);
}

TEST(Catalog, TextFormIsByteStable) {
  Market m(gen_params(64, 5), {{"a", 3, ""}}, 3);
  std::string text = m.catalog->serialize();
  Catalog back = Catalog::parse(text);
  EXPECT_EQ(back.serialize(), text);
  EXPECT_EQ(back.params, m.catalog->params);
  EXPECT_EQ(back.licenses.size(), 1u);
}

TEST(Catalog, AuditCatchesTampering) {
  Market m(gen_params(64, 6), {{"a", 3, ""}, {"b", 4, ""}}, 4);
  {
    Catalog c = *m.catalog;
    c.licenses[0].terms = "play; copy";
    EXPECT_FALSE(verify_catalog(c).empty());
  }
  {
    Catalog c = *m.catalog;
    c.k_table.at(2) = c.k_table.at(1);
    EXPECT_FALSE(verify_catalog(c).empty());
  }
  {
    Catalog c = *m.catalog;
    c.licenses[1].encrypted_license.back() ^= 1;
    EXPECT_FALSE(verify_catalog(c).empty());
  }
  {
    Catalog c = *m.catalog;
    c.licenses[1].price = 9;  // needs K_8, which is not published
    EXPECT_FALSE(verify_catalog(c).empty());
  }
}

TEST(Catalog, ParseRejectsDamage) {
  Market m(gen_params(64, 7), {{"a", 3, ""}}, 5);
  std::string text = m.catalog->serialize();
  EXPECT_THROW(Catalog::parse(text.substr(0, text.size() / 2)), Error);
  EXPECT_THROW(Catalog::parse("blinddrm-catalog: 99\n"), Error);
  EXPECT_THROW(Catalog::parse(""), Error);
  std::string extra = text + "junk: 1\n";
  EXPECT_THROW(Catalog::parse(extra), Error);
}

TEST(Catalog, SellerKeysRoundTripAndRejectBadSecret) {
  Market m(gen_params(64, 8), {{"a", 1, ""}}, 6);
  std::string text = m.seller.keys.serialize();
  SellerKeys back = SellerKeys::parse(text, m.params);
  EXPECT_EQ(back.s, m.seller.keys.s);
  EXPECT_EQ(back.sign_sk, m.seller.keys.sign_sk);
  EXPECT_THROW(SellerKeys::parse("s: 1\n", m.params), Error);
}

TEST(Catalog, SetupRejectsBadSpecs) {
  GroupParams p = gen_params(32, 9);
  Rng rng(1);
  LicensePlaintext pt{"a", "t", {}, {}};
  EXPECT_THROW(setup(p, {}, rng), Error);
  EXPECT_THROW(setup(p, {{"a", "c", 0, "t", pt, ""}}, rng), Error);
  EXPECT_THROW(setup(p, {{"a", "c", 1, "t", pt, ""}, {"a", "c", 2, "t", pt, ""}}, rng), Error);
}
