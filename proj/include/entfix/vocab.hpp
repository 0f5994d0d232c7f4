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

#include <algorithm>
#include <cstdint>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "entfix/errors.hpp"

namespace entfix {

using TokenId = std::int32_t;

/// Word-level vocabulary. The five reserved ids are fixed and occupy the
/// first slots in every vocabulary.
class Vocabulary {
 public:
  static constexpr TokenId kPad = 0;
  static constexpr TokenId kUnk = 1;
  static constexpr TokenId kEntityStart = 2;
  static constexpr TokenId kEntityEnd = 3;
  static constexpr TokenId kIsError = 4;
  static constexpr std::size_t kReserved = 5;

  Vocabulary() {
    for (const char* t : {"<pad>", "<unk>", "<s>", "<e>", "<IsError>"}) add(t);
  }

  /// Tokens ordered by descending count, ties alphabetical; tokens seen fewer
  /// than `min_count` times map to <unk>.
  static Vocabulary from_counts(const std::map<std::string, std::size_t>& counts, std::size_t min_count = 1) {
    std::vector<std::pair<std::string, std::size_t>> items(counts.begin(), counts.end());
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
    Vocabulary v;
    for (const auto& [tok, n] : items) {
      if (n >= min_count && v.index_.find(tok) == v.index_.end()) v.add(tok);
    }
    return v;
  }

  TokenId id(std::string_view token) const {
    auto it = index_.find(std::string(token));
    return it == index_.end() ? kUnk : it->second;
  }

  const std::string& token(TokenId id) const { return tokens_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// One token per line.
  std::string serialize() const {
    std::string out;
    for (const auto& t : tokens_) {
      out += t;
      out += '\n';
    }
    return out;
  }

  static Vocabulary deserialize(std::string_view blob) {
    Vocabulary v;
    v.tokens_.clear();
    v.index_.clear();
    std::size_t pos = 0;
    while (pos < blob.size()) {
      const std::size_t nl = blob.find('\n', pos);
      if (nl == std::string_view::npos) throw CheckpointError("vocabulary blob is not newline terminated");
      v.add(std::string(blob.substr(pos, nl - pos)));
      pos = nl + 1;
    }
    const Vocabulary fresh;
    if (v.size() < kReserved || !std::equal(fresh.tokens_.begin(), fresh.tokens_.end(), v.tokens_.begin()))
      throw CheckpointError("vocabulary does not start with the reserved tokens");
    return v;
  }

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.tokens_ == b.tokens_; }

 private:
  void add(std::string t) {
    index_.emplace(t, static_cast<TokenId>(tokens_.size()));
    tokens_.push_back(std::move(t));
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace entfix
