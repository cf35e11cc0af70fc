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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "blinddrm/errors.hpp"

namespace blinddrm {

/// Writer for the line-oriented `key: value` documents used by every text
/// file this project reads or writes.
class KvWriter {
 public:
  KvWriter& put(std::string_view key, std::string_view value) {
    if (value.find('\n') != std::string_view::npos || key.find(": ") != std::string_view::npos) {
      throw Error(Errc::invalid_argument, "field '" + std::string(key) + "' contains a newline");
    }
    out_.append(key).append(": ").append(value).push_back('\n');
    return *this;
  }
  KvWriter& put(std::string_view key, std::uint64_t value) {
    return put(key, std::to_string(value));
  }
  const std::string& str() const { return out_; }

 private:
  std::string out_;
};

/// Sequential reader. Fields are consumed in document order.
class KvReader {
 public:
  explicit KvReader(std::string_view text) {
    std::size_t pos = 0;
    while (pos < text.size()) {
      std::size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) {
        throw Error(Errc::parse_error, "line " + std::to_string(lines_.size() + 1) +
                                           ": missing trailing newline");
      }
      std::string_view line = text.substr(pos, end - pos);
      std::size_t sep = line.find(": ");
      if (sep == std::string_view::npos) {
        throw Error(Errc::parse_error,
                    "line " + std::to_string(lines_.size() + 1) + ": expected 'key: value'");
      }
      lines_.push_back({std::string(line.substr(0, sep)), std::string(line.substr(sep + 2))});
      pos = end + 1;
    }
  }

  bool at_end() const { return next_ == lines_.size(); }
  bool peek(std::string_view key) const { return !at_end() && lines_[next_].first == key; }
  /// Key of the next unread line; empty at end of document.
  std::string_view next_key() const {
    return at_end() ? std::string_view() : std::string_view(lines_[next_].first);
  }

  std::string take(std::string_view key) {
    if (!peek(key)) {
      fail("expected key '" + std::string(key) + "'" +
           (at_end() ? std::string(" at end of document") : ", found '" + lines_[next_].first + "'"));
    }
    return lines_[next_++].second;
  }

  std::optional<std::string> take_optional(std::string_view key) {
    if (!peek(key)) return std::nullopt;
    return lines_[next_++].second;
  }

  std::uint64_t take_u64(std::string_view key) {
    std::string v = take(key);
    if (v.empty() || v.size() > 19 || v.find_first_not_of("0123456789") != std::string::npos ||
        (v.size() > 1 && v[0] == '0')) {
      fail("field '" + std::string(key) + "' is not a canonical unsigned integer");
    }
    return std::stoull(v);
  }

  void expect_end() const {
    if (!at_end()) fail("unexpected key '" + lines_[next_].first + "'");
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(Errc::parse_error, "line " + std::to_string(next_ + 1) + ": " + what);
  }

 private:
  std::vector<std::pair<std::string, std::string>> lines_;
  std::size_t next_ = 0;
};

}  // namespace blinddrm
