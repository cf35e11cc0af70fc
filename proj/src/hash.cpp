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

#include "blinddrm/hash.hpp"

#include <openssl/evp.h>

#include "blinddrm/errors.hpp"

namespace blinddrm {

struct Sha256::Ctx {
  EVP_MD_CTX* md = nullptr;
  ~Ctx() { EVP_MD_CTX_free(md); }
};

Sha256::Sha256() : ctx_(std::make_unique<Ctx>()) {
  ctx_->md = EVP_MD_CTX_new();
  if (ctx_->md == nullptr || EVP_DigestInit_ex(ctx_->md, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("EVP sha256 init failed");
  }
}

Sha256::~Sha256() = default;
Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

Sha256& Sha256::update(ByteView data) {
  if (EVP_DigestUpdate(ctx_->md, data.data(), data.size()) != 1) {
    throw std::runtime_error("EVP sha256 update failed");
  }
  return *this;
}

Digest Sha256::finish() {
  Digest out{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx_->md, out.data(), &len) != 1 || len != out.size()) {
    throw std::runtime_error("EVP sha256 final failed");
  }
  return out;
}

Digest sha256(ByteView data) { return Sha256().update(data).finish(); }

Bytes hash_expand(std::string_view domain, ByteView input, std::size_t length) {
  Bytes out;
  out.reserve(length + 32);
  for (std::uint32_t block = 0; out.size() < length; ++block) {
    ByteWriter prefix;
    prefix.text(domain).u32(block);
    Digest d = Sha256().update(prefix.data()).update(input).finish();
    out.insert(out.end(), d.begin(), d.end());
  }
  out.resize(length);
  return out;
}

}  // namespace blinddrm
