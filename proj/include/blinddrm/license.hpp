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

#include <string>
#include <vector>

#include "blinddrm/bytes.hpp"
#include "blinddrm/group.hpp"
#include "blinddrm/rng.hpp"

namespace blinddrm {

/// The secret part of a license: terms as actually granted plus the
/// content key. content_key is opaque at this layer.
struct LicensePlaintext {
  std::string license_id;
  std::string terms;
  Bytes content_key;
  std::vector<std::string> permissions;

  Bytes encode() const;
  static LicensePlaintext decode(ByteView bytes);
  bool operator==(const LicensePlaintext&) const = default;
};

/// 32-byte symmetric key: SHA-256 over the canonical encoding of `key`.
Bytes license_kdf(const GroupElement& key);

/// AES-256-GCM. Blob layout: 12-byte nonce || ciphertext || 16-byte tag.
Bytes encrypt_license(const GroupElement& key, const LicensePlaintext& plaintext, Rng& rng);
/// Throws Errc::authentication_failure on a wrong key or any tampering.
LicensePlaintext decrypt_license(const GroupElement& key, ByteView blob);

}  // namespace blinddrm
