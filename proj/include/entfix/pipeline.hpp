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

// Supervision labels, the training loop and thresholded correction.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "entfix/corpus.hpp"
#include "entfix/encoder.hpp"
#include "entfix/model.hpp"
#include "entfix/optimizer.hpp"
#include "entfix/retrieval.hpp"
#include "entfix/scoring.hpp"

namespace entfix {

/// Detection label 1 at the corrupted entity; correction label 1 at the
/// first evidence entity whose surface equals the original surface. Columns
/// cover every entity of `evidence`.
inline LabelSet make_labels(const Triple& triple, const EvidenceSet& evidence) {
  const std::size_t ns = triple.input_summary.entities.size();
  LabelSet labels{std::vector<double>(ns, 0.0), Matrix(ns, evidence.entities.size())};
  if (triple.corruption) {
    const auto& rec = *triple.corruption;
    if (rec.entity_index >= ns) throw InvalidAnnotation("corruption record points past the summary entities");
    labels.s_err[rec.entity_index] = 1.0;
    for (std::size_t j = 0; j < evidence.entities.size(); ++j) {
      if (evidence.entities[j].surface == rec.original_surface) {
        labels.s_cor(rec.entity_index, j) = 1.0;
        break;
      }
    }
  }
  return labels;
}

/// Keeps only the label columns of evidence entities that survived input
/// truncation, in mark order.
inline LabelSet restrict_labels(const LabelSet& full, const std::vector<std::size_t>& kept_ids) {
  LabelSet out{full.s_err, Matrix(full.s_err.size(), kept_ids.size())};
  for (std::size_t i = 0; i < full.s_err.size(); ++i) {
    for (std::size_t j = 0; j < kept_ids.size(); ++j) out.s_cor(i, j) = full.s_cor(i, kept_ids[j]);
  }
  return out;
}

struct TrainConfig {
  std::size_t epochs = 5;
  double learning_rate = 1e-3;
  std::size_t batch_size = 8;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_epsilon = 1e-8;
  std::uint64_t seed = 1;
  double thr_det = 0.5;
  double thr_cor = 0.5;
  std::size_t evidence_k = 2;
  std::size_t min_count = 1;
  bool mask_correction_rows = true;

  void validate() const {
    if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
    if (batch_size < 1) throw std::invalid_argument("batch_size must be at least 1");
    if (!(learning_rate >= 0.0)) throw std::invalid_argument("learning_rate must be non-negative");
    if (!(thr_det > 0.0 && thr_det < 1.0) || !(thr_cor > 0.0 && thr_cor < 1.0))
      throw std::invalid_argument("thresholds must lie strictly between 0 and 1");
  }
};

inline Vocabulary build_vocabulary(const std::vector<Triple>& triples, std::size_t min_count = 1) {
  std::map<std::string, std::size_t> counts;
  auto count = [&](const AnnotatedText& t) {
    for (const auto& tok : text::word_tokens(t.text)) ++counts[tok.text];
  };
  for (const auto& t : triples) {
    count(t.input_summary);
    count(t.target_summary);
    count(t.article);
  }
  return Vocabulary::from_counts(counts, min_count);
}

/// A fresh model with vocabulary from `triples` and seeded parameters.
inline Model init_model(const std::vector<Triple>& triples, EncoderConfig encoder, const TrainConfig& config,
                        Rng& rng) {
  Model m;
  m.vocab = build_vocabulary(triples, config.min_count);
  encoder.vocab_size = m.vocab.size();
  encoder.validate();
  m.encoder = encoder;
  m.params = init_model_params(encoder, rng);
  m.thresholds = Thresholds{config.thr_det, config.thr_cor};
  m.scoring.mask_correction_rows = config.mask_correction_rows;
  m.evidence_k = config.evidence_k;
  return m;
}

struct PreparedExample {
  std::string id;
  EncodedExample encoded;
  LabelSet labels;
};

struct PrepareStats {
  std::size_t rejected = 0;        // summary too long
  std::size_t target_missing = 0;  // original surface absent from the kept evidence
};

inline std::vector<PreparedExample> prepare_examples(const Model& m, const std::vector<Triple>& triples,
                                                     PrepareStats* stats = nullptr) {
  std::vector<PreparedExample> out;
  for (const auto& t : triples) {
    const EvidenceSet evidence = select_evidence(t.input_summary, t.article, m.evidence_k);
    EncodedExample ex;
    try {
      ex = build_input(t.input_summary, evidence, m.vocab, m.encoder);
    } catch (const SummaryTooLong&) {
      if (stats) ++stats->rejected;
      continue;
    }
    LabelSet labels = restrict_labels(make_labels(t, evidence), ex.evidence_entity_ids);
    if (stats && t.corruption) {
      const auto row = labels.s_cor.row(t.corruption->entity_index);
      if (std::find(row.begin(), row.end(), 1.0) == row.end()) ++stats->target_missing;
    }
    out.push_back(PreparedExample{t.id, std::move(ex), std::move(labels)});
  }
  return out;
}

struct EpochStats {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  std::optional<double> validation_loss;
};

struct TrainResult {
  Model model;
  std::vector<EpochStats> history;
  PrepareStats prepare;
};

inline double mean_loss(const Model& m, const std::vector<PreparedExample>& examples) {
  if (examples.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : examples) sum += example_loss(m, ex.encoded, ex.labels).total();
  return sum / static_cast<double>(examples.size());
}

/// Minibatch Adam on the summed detection and correction loss. Batches are
/// drawn from a seeded shuffle each epoch; gradients are averaged over the
/// batch. Single-threaded and deterministic for a fixed seed.
inline TrainResult train(const std::vector<Triple>& dataset, const TrainConfig& config, const EncoderConfig& encoder,
                         const std::vector<Triple>* validation = nullptr,
                         const std::function<void(const EpochStats&)>& on_epoch = {}) {
  config.validate();
  if (dataset.empty()) throw EmptyCorpus();
  Rng rng(config.seed);
  TrainResult result;
  result.model = init_model(dataset, encoder, config, rng);
  Model& m = result.model;

  const auto examples = prepare_examples(m, dataset, &result.prepare);
  if (examples.empty()) throw AllExamplesRejected();
  std::vector<PreparedExample> held_out;
  if (validation) held_out = prepare_examples(m, *validation);

  ModelParams grads = zero_model_params(m.encoder);
  const auto param_views = parameter_views(m.params);
  const auto grad_views = parameter_views(grads);
  Adam adam(AdamConfig{config.learning_rate, config.beta1, config.beta2, config.adam_epsilon}, param_views);

  std::vector<std::size_t> order(examples.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (auto v : grad_views) std::fill(v.begin(), v.end(), 0.0);
      for (std::size_t k = start; k < stop; ++k) {
        const auto& ex = examples[order[k]];
        epoch_loss += example_loss_and_gradient(m, ex.encoded, ex.labels, grads).total();
      }
      const double inv = 1.0 / static_cast<double>(stop - start);
      for (auto v : grad_views) {
        for (auto& g : v) g *= inv;
      }
      adam.step(param_views, grad_views);
    }
    EpochStats stats{epoch, epoch_loss / static_cast<double>(examples.size()), std::nullopt};
    if (!held_out.empty()) stats.validation_loss = mean_loss(m, held_out);
    result.history.push_back(stats);
    if (on_epoch) on_epoch(stats);
  }
  return result;
}

// ---------------------------------------------------------------------------
// Inference

enum class EvidenceMode { kSelected, kFullArticle };

inline constexpr std::size_t kFullArticleMaxLen = 512;

struct InferenceOptions {
  EvidenceMode mode = EvidenceMode::kSelected;
  std::optional<std::size_t> max_len;  // default: model max_len, or 512 for the full article
};

struct CandidateScore {
  std::size_t evidence_entity = 0;
  std::string surface;
  double score = 0.0;
};

struct EntityTrace {
  std::string surface;
  EntityType etype = EntityType::kMisc;
  double erroneous_score = 0.0;
  bool detected = false;
  std::vector<CandidateScore> candidates;  // in evidence order
};

struct Edit {
  std::size_t entity_index = 0;
  std::string original;
  std::string replacement;
  double score = 0.0;

  friend bool operator==(const Edit&, const Edit&) = default;
};

struct CorrectionResult {
  std::string output_text;
  std::vector<Edit> edits;
  std::vector<EntityTrace> trace;
  std::vector<std::size_t> evidence_sentences;  // article indices
  bool summary_too_long = false;
};

/// Everything threshold-independent about one input: the evidence, the
/// encoded input and all head scores.
struct ScoredSummary {
  AnnotatedText summary;
  EvidenceSet evidence;
  EncodedExample encoded;
  HeadScores scores;
  bool summary_too_long = false;
};

inline ScoredSummary score_with_evidence(const Model& m, const AnnotatedText& summary, EvidenceSet evidence,
                                         const InferenceOptions& options = {}) {
  ScoredSummary out;
  out.summary = summary;
  out.evidence = std::move(evidence);
  EncoderConfig config = m.encoder;
  config.max_len = options.max_len.value_or(options.mode == EvidenceMode::kSelected ? m.encoder.max_len
                                                                                    : kFullArticleMaxLen);
  try {
    out.encoded = build_input(summary, out.evidence, m.vocab, config);
  } catch (const SummaryTooLong&) {
    out.summary_too_long = true;
    return out;
  }
  const auto bundle = encode(out.encoded, m.params.encoder, config);
  out.scores = score_heads(bundle, m.params.detection, m.params.correction);
  return out;
}

inline ScoredSummary score_summary(const Model& m, const AnnotatedText& summary, const AnnotatedText& article,
                                   const InferenceOptions& options = {}) {
  return score_with_evidence(m, summary,
                             options.mode == EvidenceMode::kSelected ? select_evidence(summary, article, m.evidence_k)
                                                                     : full_article_evidence(article),
                             options);
}

/// Scores raw, unannotated text. The article is segmented first and the
/// fallback tagger runs only over the sentences that become evidence, so
/// evidence selection also shrinks the tagging work.
inline ScoredSummary score_raw(const Model& m, std::string summary_text, std::string article_text,
                               const InferenceOptions& options = {}) {
  const AnnotatedText summary = annotate(std::move(summary_text));
  AnnotatedText article;
  article.sentences = segment_sentences(article_text);
  article.text = std::move(article_text);
  std::vector<std::size_t> indices;
  if (options.mode == EvidenceMode::kSelected) {
    indices = select_evidence_indices(summary, article, m.evidence_k);
  } else {
    for (std::size_t i = 0; i < article.sentences.size(); ++i) indices.push_back(i);
  }
  for (std::size_t i : indices) {
    const SentenceRange r = article.sentences[i];
    for (auto e : tag_entities(article.sentence_text(i))) {
      e.start += r.start;
      e.end += r.start;
      article.entities.push_back(std::move(e));
    }
  }
  return score_with_evidence(m, summary, assemble_evidence(article, indices), options);
}

/// Entities scoring above thr_det are errors; each is replaced by its
/// highest-scoring evidence entity (lowest index on ties) when that score is
/// above thr_cor and the surface differs. All edits use one encoding.
inline CorrectionResult apply_thresholds(const ScoredSummary& s, const Thresholds& thr) {
  CorrectionResult r;
  r.output_text = s.summary.text;
  r.evidence_sentences = s.evidence.article_indices();
  r.summary_too_long = s.summary_too_long;
  if (s.summary_too_long) return r;

  const std::size_t ns = s.encoded.ns(), nv = s.encoded.nv();
  for (std::size_t i = 0; i < ns; ++i) {
    const EntitySpan& ent = s.summary.entities[i];
    EntityTrace t{ent.surface, ent.etype, s.scores.detection[i], s.scores.detection[i] > thr.detection, {}};
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < nv; ++j) {
      const std::size_t id = s.encoded.evidence_entity_ids[j];
      const double score = s.scores.correction(i, j);
      t.candidates.push_back(CandidateScore{id, s.evidence.entities[id].surface, score});
      if (!best || score > s.scores.correction(i, *best)) best = j;
    }
    if (t.detected && best) {
      const double score = s.scores.correction(i, *best);
      const std::string& surface = t.candidates[*best].surface;
      if (score > thr.correction && surface != ent.surface) r.edits.push_back(Edit{i, ent.surface, surface, score});
    }
    r.trace.push_back(std::move(t));
  }
  for (auto it = r.edits.rbegin(); it != r.edits.rend(); ++it) {
    const EntitySpan& ent = s.summary.entities[it->entity_index];
    r.output_text.replace(ent.start, ent.end - ent.start, it->replacement);
  }
  return r;
}

inline CorrectionResult correct(const Model& m, const AnnotatedText& summary, const AnnotatedText& article,
                                const InferenceOptions& options = {}) {
  return apply_thresholds(score_summary(m, summary, article, options), m.thresholds);
}

/// Plain-text trace: one line per summary entity with its erroneous score
/// and the top candidates.
inline std::string format_trace(const CorrectionResult& r, std::size_t top_k = 3) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3);
  if (r.summary_too_long) {
    out << "summary too long; left unchanged\n";
    return out.str();
  }
  for (std::size_t i = 0; i < r.trace.size(); ++i) {
    const auto& t = r.trace[i];
    out << (t.detected ? "* " : "  ") << '[' << t.surface << "] " << to_string(t.etype) << " err=" << t.erroneous_score;
    auto cands = t.candidates;
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) { return a.score > b.score; });
    if (cands.size() > top_k) cands.resize(top_k);
    out << " |";
    for (const auto& c : cands) out << ' ' << c.surface << " (" << c.score << ')';
    const auto edit = std::find_if(r.edits.begin(), r.edits.end(), [&](const Edit& e) { return e.entity_index == i; });
    if (edit != r.edits.end()) out << " -> " << edit->replacement;
    out << '\n';
  }
  out << "output: " << r.output_text << '\n';
  return out.str();
}

}  // namespace entfix
