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

// Exact-match accuracy on synthetic test sets, per-label changed/edited
// counts, and end-to-end throughput.

#include <chrono>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "entfix/corpus.hpp"
#include "entfix/errors.hpp"
#include "entfix/pipeline.hpp"
#include "entfix/text.hpp"

namespace entfix {

/// Fraction of outputs equal to gold after whitespace normalization.
inline double exact_match_accuracy(const std::vector<std::string>& outputs, const std::vector<std::string>& gold) {
  if (outputs.size() != gold.size())
    throw LengthMismatch(std::to_string(outputs.size()) + " outputs for " + std::to_string(gold.size()) + " gold summaries");
  if (outputs.empty()) return 0.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < outputs.size(); ++i) {
    if (text::normalize_whitespace(outputs[i]) == text::normalize_whitespace(gold[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(outputs.size());
}

enum class Consistency { kConsistent, kInconsistent };

inline Consistency parse_consistency(std::string_view s) {
  if (s == "consistent" || s == "CORRECT") return Consistency::kConsistent;
  if (s == "inconsistent" || s == "INCORRECT") return Consistency::kInconsistent;
  throw InvalidAnnotation("unknown consistency label '" + std::string(s) + "'");
}

/// Hand-checked verdict for one output: the consistency label before and
/// after correction.
struct Adjudication {
  Consistency before = Consistency::kConsistent;
  Consistency after = Consistency::kConsistent;
};

struct BucketCounts {
  std::size_t count = 0;
  std::size_t edited = 0;
  std::optional<std::size_t> changed;  // empty when an edited example lacks an adjudication
};

struct FactccCounts {
  BucketCounts consistent;
  BucketCounts inconsistent;
};

/// One entry per result: its id, label and number of edits. An example is
/// "edited" when it has at least one edit and "changed" when it is edited
/// and its adjudication shows a label flip.
struct LabelledOutcome {
  std::string id;
  Consistency label = Consistency::kConsistent;
  std::size_t edits = 0;
};

inline FactccCounts factcc_counts(const std::vector<LabelledOutcome>& outcomes,
                                  const std::map<std::string, Adjudication>* adjudication) {
  FactccCounts out;
  bool missing[2] = {adjudication == nullptr, adjudication == nullptr};
  std::size_t changed[2] = {0, 0};
  for (const auto& o : outcomes) {
    const int b = o.label == Consistency::kConsistent ? 0 : 1;
    BucketCounts& bucket = b == 0 ? out.consistent : out.inconsistent;
    ++bucket.count;
    if (o.edits == 0) continue;
    ++bucket.edited;
    if (!adjudication) continue;
    auto it = adjudication->find(o.id);
    if (it == adjudication->end()) {
      missing[b] = true;
    } else if (it->second.before != it->second.after) {
      ++changed[b];
    }
  }
  if (!missing[0]) out.consistent.changed = changed[0];
  if (!missing[1]) out.inconsistent.changed = changed[1];
  return out;
}

struct ThroughputOptions {
  EvidenceMode mode = EvidenceMode::kSelected;
  std::size_t batch_size = 32;
  std::size_t jobs = 1;
  bool retag = true;  // run segmentation and tagging on raw text as part of the timed work
  std::size_t passes = 1;  // timed passes over the inputs after the warm-up
};

struct ThroughputResult {
  double samples_per_min = 0.0;
  double seconds = 0.0;
  std::size_t measured = 0;
  std::size_t warmup = 0;
  std::size_t total_tokens = 0;  // encoder positions processed in the timed part
};

inline constexpr std::size_t kMinThroughputInputs = 30;

/// End-to-end correction rate including preprocessing. The first batch is a
/// warm-up and is not timed; the rest is timed `passes` times.
inline ThroughputResult measure_throughput(const Model& m, const std::vector<Document>& docs,
                                           const ThroughputOptions& opt) {
  if (docs.size() < kMinThroughputInputs)
    throw std::invalid_argument("throughput needs at least " + std::to_string(kMinThroughputInputs) + " inputs, got " +
                                std::to_string(docs.size()));
  const std::size_t batch = std::max<std::size_t>(1, opt.batch_size);
  const std::size_t jobs = std::max<std::size_t>(1, opt.jobs);
  InferenceOptions inf;
  inf.mode = opt.mode;

  std::vector<std::size_t> tokens(docs.size(), 0);
  auto run_one = [&](std::size_t i) {
    const Document& d = docs[i];
    const ScoredSummary s = opt.retag ? score_raw(m, d.summary.text, d.article.text, inf)
                                      : score_summary(m, d.summary, d.article, inf);
    tokens[i] = apply_thresholds(s, m.thresholds).summary_too_long ? 0 : s.encoded.attention_len;
  };
  auto run_range = [&](std::size_t begin, std::size_t end) {
    if (jobs == 1) {
      for (std::size_t i = begin; i < end; ++i) run_one(i);
      return;
    }
    std::vector<std::thread> workers;
    for (std::size_t w = 0; w < jobs; ++w) {
      workers.emplace_back([&, w] {
        for (std::size_t i = begin + w; i < end; i += jobs) run_one(i);
      });
    }
    for (auto& t : workers) t.join();
  };

  const std::size_t warm = std::min(batch, docs.size() - 1);
  run_range(0, warm);
  const std::size_t passes = std::max<std::size_t>(1, opt.passes);
  const auto t0 = std::chrono::steady_clock::now();
  for (std::size_t pass = 0; pass < passes; ++pass) {
    for (std::size_t start = warm; start < docs.size(); start += batch)
      run_range(start, std::min(docs.size(), start + batch));
  }
  const auto t1 = std::chrono::steady_clock::now();

  ThroughputResult r;
  r.warmup = warm;
  r.measured = passes * (docs.size() - warm);
  r.seconds = std::chrono::duration<double>(t1 - t0).count();
  r.samples_per_min = r.seconds > 0.0 ? 60.0 * static_cast<double>(r.measured) / r.seconds : 0.0;
  for (std::size_t i = warm; i < docs.size(); ++i) r.total_tokens += passes * tokens[i];
  return r;
}

}  // namespace entfix
