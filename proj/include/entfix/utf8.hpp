// Copyright 2026 The Entfix Authors.
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

// Conversion between code-point offsets (used in every file format) and the
// byte offsets used internally over UTF-8 std::string.

#include <algorithm>
#include <cstddef>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace entfix::utf8 {

inline bool is_continuation(unsigned char c) { return (c & 0xC0) == 0x80; }

/// Byte offset of every code point boundary; result[i] is the byte offset of
/// code point i and result.back() == text.size().
inline std::vector<std::size_t> boundaries(std::string_view text) {
  std::vector<std::size_t> out;
  out.reserve(text.size() + 1);
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (!is_continuation(static_cast<unsigned char>(text[i]))) out.push_back(i);
  }
  out.push_back(text.size());
  return out;
}

inline std::size_t to_byte(const std::vector<std::size_t>& bounds, std::size_t code_point) {
  if (code_point >= bounds.size()) throw std::out_of_range("code point offset past end of text");
  return bounds[code_point];
}

inline std::size_t to_code_point(const std::vector<std::size_t>& bounds, std::size_t byte) {
  auto it = std::lower_bound(bounds.begin(), bounds.end(), byte);
  if (it == bounds.end() || *it != byte) throw std::out_of_range("byte offset is not a code point boundary");
  return static_cast<std::size_t>(it - bounds.begin());
}

}  // namespace entfix::utf8
