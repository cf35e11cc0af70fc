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

#include "blinddrm/license.hpp"

#include <openssl/evp.h>

#include <memory>

#include "blinddrm/errors.hpp"
#include "blinddrm/hash.hpp"

namespace blinddrm {

namespace {

constexpr std::size_t kNonceBytes = 12;
constexpr std::size_t kTagBytes = 16;
constexpr std::string_view kAad = "blinddrm/license/v1";

struct CipherCtxDeleter {
  void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;

CipherCtx new_ctx() {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  return ctx;
}

[[noreturn]] void auth_failure() {
  throw Error(Errc::authentication_failure, "license blob does not authenticate under this key");
}

}  // namespace

Bytes LicensePlaintext::encode() const {
  ByteWriter w;
  w.text("blinddrm/license-plaintext/v1").text(license_id).text(terms).bytes(content_key);
  w.u32(static_cast<std::uint32_t>(permissions.size()));
  for (const auto& p : permissions) w.text(p);
  return w.take();
}

LicensePlaintext LicensePlaintext::decode(ByteView bytes) {
  ByteReader r(bytes);
  if (r.text() != "blinddrm/license-plaintext/v1") r.fail("not a license plaintext");
  LicensePlaintext p;
  p.license_id = r.text();
  p.terms = r.text();
  p.content_key = r.bytes();
  std::uint32_t n = r.count(4);
  for (std::uint32_t i = 0; i < n; ++i) p.permissions.push_back(r.text());
  r.expect_end();
  return p;
}

Bytes license_kdf(const GroupElement& key) {
  ByteWriter w;
  w.text("blinddrm/license-kdf/v1");
  key.encode_to(w);
  Digest d = sha256(w.data());
  return Bytes(d.begin(), d.end());
}

Bytes encrypt_license(const GroupElement& key, const LicensePlaintext& plaintext, Rng& rng) {
  Bytes k = license_kdf(key);
  Bytes nonce = rng.bytes(kNonceBytes);
  Bytes pt = plaintext.encode();

  auto ctx = new_ctx();
  int len = 0;
  Bytes out(kNonceBytes + pt.size() + kTagBytes);
  std::copy(nonce.begin(), nonce.end(), out.begin());
  bool ok = EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, k.data(), nonce.data()) == 1 &&
            EVP_EncryptUpdate(ctx.get(), nullptr, &len,
                              reinterpret_cast<const unsigned char*>(kAad.data()),
                              static_cast<int>(kAad.size())) == 1 &&
            EVP_EncryptUpdate(ctx.get(), out.data() + kNonceBytes, &len, pt.data(),
                              static_cast<int>(pt.size())) == 1 &&
            EVP_EncryptFinal_ex(ctx.get(), out.data() + kNonceBytes + len, &len) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagBytes,
                                out.data() + kNonceBytes + pt.size()) == 1;
  if (!ok) throw std::runtime_error("AES-GCM encryption failed");
  return out;
}

LicensePlaintext decrypt_license(const GroupElement& key, ByteView blob) {
  if (blob.size() < kNonceBytes + kTagBytes) auth_failure();
  Bytes k = license_kdf(key);
  const std::size_t ct_len = blob.size() - kNonceBytes - kTagBytes;
  Bytes tag(blob.end() - kTagBytes, blob.end());

  auto ctx = new_ctx();
  int len = 0;
  Bytes pt(ct_len + 1);
  bool ok = EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, k.data(), blob.data()) == 1 &&
            EVP_DecryptUpdate(ctx.get(), nullptr, &len,
                              reinterpret_cast<const unsigned char*>(kAad.data()),
                              static_cast<int>(kAad.size())) == 1 &&
            EVP_DecryptUpdate(ctx.get(), pt.data(), &len, blob.data() + kNonceBytes,
                              static_cast<int>(ct_len)) == 1 &&
            EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagBytes, tag.data()) == 1;
  int final_len = 0;
  if (!ok || EVP_DecryptFinal_ex(ctx.get(), pt.data() + len, &final_len) != 1) auth_failure();
  pt.resize(ct_len);
  try {
    return LicensePlaintext::decode(pt);
  } catch (const DecodeError&) {
    // Authenticated but unparseable: the seller encrypted garbage.
    auth_failure();
  }
}

}  // namespace blinddrm
