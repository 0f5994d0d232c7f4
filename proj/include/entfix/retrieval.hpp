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

// Evidence sentence selection by ROUGE-L F1 between each summary sentence and
// every article sentence.

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "entfix/corpus.hpp"
#include "entfix/text.hpp"

namespace entfix {

/// Longest common subsequence length, O(|a||b|) time and O(min) memory.
template <typename T>
std::size_t lcs_length(std::span<const T> a, std::span<const T> b) {
  if (a.size() < b.size()) std::swap(a, b);
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline std::size_t lcs_length(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  return lcs_length(std::span<const std::string>(a), std::span<const std::string>(b));
}

/// ROUGE-L F1 (beta = 1). Precision and recall are 0 for empty inputs.
inline double rouge_l(const std::vector<std::string>& candidate, const std::vector<std::string>& reference) {
  const auto l = static_cast<double>(lcs_length(candidate, reference));
  const double p = candidate.empty() ? 0.0 : l / static_cast<double>(candidate.size());
  const double r = reference.empty() ? 0.0 : l / static_cast<double>(reference.size());
  if (p + r == 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

struct EvidenceSentence {
  std::size_t article_index = 0;
  std::size_t start = 0;  // byte range inside EvidenceSet::text
  std::size_t end = 0;
};

/// Selected article sentences in article order, concatenated with single
/// spaces, with the article entities that fall inside them re-indexed into
/// the concatenated text.
struct EvidenceSet {
  std::vector<EvidenceSentence> sentences;
  std::string text;
  std::vector<EntitySpan> entities;
  std::vector<std::size_t> entity_sentence;  // evidence sentence holding each entity

  std::size_t m() const { return sentences.size(); }
  std::vector<std::size_t> article_indices() const {
    std::vector<std::size_t> out;
    for (const auto& s : sentences) out.push_back(s.article_index);
    return out;
  }
};

/// Builds the evidence set for the given article sentence indices, which must
/// be strictly increasing.
inline EvidenceSet assemble_evidence(const AnnotatedText& article, const std::vector<std::size_t>& indices) {
  EvidenceSet ev;
  std::size_t next_entity = 0;
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const SentenceRange& src = article.sentences.at(indices[k]);
    if (!ev.text.empty()) ev.text.push_back(' ');
    const std::size_t base = ev.text.size();
    ev.text.append(article.sentence_text(indices[k]));
    ev.sentences.push_back(EvidenceSentence{indices[k], base, ev.text.size()});

    while (next_entity < article.entities.size() && article.entities[next_entity].start < src.start) ++next_entity;
    for (std::size_t e = next_entity; e < article.entities.size() && article.entities[e].start < src.end; ++e) {
      const EntitySpan& a = article.entities[e];
      if (a.end > src.end) continue;
      ev.entities.push_back(EntitySpan{a.start - src.start + base, a.end - src.start + base, a.surface, a.etype});
      ev.entity_sentence.push_back(k);
    }
  }
  return ev;
}

/// For every summary sentence, the k article sentences with the highest
/// ROUGE-L F1 (lower article index wins ties); returns the deduplicated union
/// in article order. Empty summary sentences select nothing. Only the
/// article's sentence ranges are used.
inline std::vector<std::size_t> select_evidence_indices(const AnnotatedText& summary, const AnnotatedText& article,
                                                        std::size_t k = 2) {
  if (k == 0) throw std::invalid_argument("evidence count k must be positive");
  std::vector<std::vector<std::string>> article_tokens;
  article_tokens.reserve(article.sentences.size());
  for (std::size_t i = 0; i < article.sentences.size(); ++i) {
    article_tokens.push_back(text::rouge_tokens(article.sentence_text(i)));
  }

  std::vector<std::string_view> summary_sentences;
  for (std::size_t i = 0; i < summary.sentences.size(); ++i) summary_sentences.push_back(summary.sentence_text(i));
  if (summary.sentences.empty() && !summary.text.empty()) summary_sentences.push_back(summary.text);

  std::set<std::size_t> chosen;
  std::vector<std::size_t> order(article_tokens.size());
  std::vector<double> scores(article_tokens.size());
  for (std::string_view sentence : summary_sentences) {
    const auto ref = text::rouge_tokens(sentence);
    if (ref.empty()) continue;
    for (std::size_t i = 0; i < article_tokens.size(); ++i) scores[i] = rouge_l(article_tokens[i], ref);
    std::iota(order.begin(), order.end(), 0);
    const std::size_t take = std::min(k, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](std::size_t x, std::size_t y) { return scores[x] != scores[y] ? scores[x] > scores[y] : x < y; });
    chosen.insert(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return {chosen.begin(), chosen.end()};
}

inline EvidenceSet select_evidence(const AnnotatedText& summary, const AnnotatedText& article, std::size_t k = 2) {
  return assemble_evidence(article, select_evidence_indices(summary, article, k));
}

/// Every article sentence as evidence; the whole-article pipeline variant.
inline EvidenceSet full_article_evidence(const AnnotatedText& article) {
  std::vector<std::size_t> all(article.sentences.size());
  std::iota(all.begin(), all.end(), 0);
  return assemble_evidence(article, all);
}

}  // namespace entfix
