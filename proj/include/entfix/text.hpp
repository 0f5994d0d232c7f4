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

// Word-level tokenization shared by retrieval and the encoder.

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace entfix::text {

struct Token {
  std::string text;   // lowercased
  std::size_t begin;  // byte offset, inclusive
  std::size_t end;    // byte offset, exclusive
};

inline bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }

inline bool is_ascii_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }
inline bool is_digit(char c) { return c >= '0' && c <= '9'; }
inline bool is_upper(char c) { return c >= 'A' && c <= 'Z'; }

// Non-ASCII bytes are treated as word characters so multi-byte letters stay
// inside one token.
inline bool is_word_char(char c) {
  return is_ascii_alpha(c) || is_digit(c) || static_cast<unsigned char>(c) >= 0x80;
}

inline char to_lower(char c) { return is_upper(c) ? static_cast<char>(c - 'A' + 'a') : c; }

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = to_lower(c);
  return out;
}

/// Splits on whitespace; word-character runs become tokens and every other
/// character is its own token. Offsets are shifted by `base`.
inline std::vector<Token> word_tokens(std::string_view s, std::size_t base = 0) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    if (is_space(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    if (is_word_char(s[i])) {
      while (j < s.size() && is_word_char(s[j])) ++j;
    }
    out.push_back(Token{lowercase(s.substr(i, j - i)), base + i, base + j});
    i = j;
  }
  return out;
}

/// Tokens used for ROUGE: lowercased word runs only, punctuation dropped.
inline std::vector<std::string> rouge_tokens(std::string_view s) {
  std::vector<std::string> out;
  for (auto& tok : word_tokens(s)) {
    if (is_word_char(tok.text.front())) out.push_back(std::move(tok.text));
  }
  return out;
}

/// Collapses whitespace runs to one space and trims both ends.
inline std::string normalize_whitespace(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  bool pending_space = false;
  for (char c : s) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace entfix::text
