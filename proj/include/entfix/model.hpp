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

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entfix/encoder.hpp"
#include "entfix/scoring.hpp"
#include "entfix/vocab.hpp"

namespace entfix {

/// Encoder plus both heads.
struct ModelParams {
  EncoderParams encoder;
  DetectionHead detection;
  CorrectionHead correction;
};

/// Calls f(name, values, rows, cols) for every parameter tensor in a fixed
/// order. Works on const and non-const ModelParams.
template <typename Params, typename F>
void visit_model_params(Params& p, F&& f) {
  visit_encoder_params(p.encoder, [&](const std::string& name, auto& m) { f(name, m.values(), m.rows(), m.cols()); });
  f(std::string("detection.weight"), p.detection.weight.values(), p.detection.weight.rows(),
    p.detection.weight.cols());
  f(std::string("detection.bias"), std::span(&p.detection.bias, 1), std::size_t{1}, std::size_t{1});
  f(std::string("correction.weight"), p.correction.weight.values(), p.correction.weight.rows(),
    p.correction.weight.cols());
  f(std::string("correction.bias"), std::span(&p.correction.bias, 1), std::size_t{1}, std::size_t{1});
}

/// Flat views over every parameter, in visit order.
inline std::vector<std::span<double>> parameter_views(ModelParams& p) {
  std::vector<std::span<double>> out;
  visit_model_params(p, [&](const std::string&, std::span<double> v, std::size_t, std::size_t) { out.push_back(v); });
  return out;
}

inline std::size_t parameter_count(const ModelParams& p) {
  std::size_t n = 0;
  visit_model_params(p, [&](const std::string&, std::span<const double> v, std::size_t, std::size_t) { n += v.size(); });
  return n;
}

inline ModelParams zero_model_params(const EncoderConfig& c) {
  return ModelParams{zero_encoder_params(c), DetectionHead{Matrix(c.d_model, c.d_model), 0.0},
                     CorrectionHead{Matrix(c.d_model, c.d_model), 0.0}};
}

inline ModelParams init_model_params(const EncoderConfig& c, Rng& rng) {
  ModelParams p;
  p.encoder = init_encoder_params(c, rng);
  p.detection = init_head<DetectionHead>(c.d_model, rng);
  p.correction = init_head<CorrectionHead>(c.d_model, rng);
  return p;
}

inline bool bit_equal(const ModelParams& a, const ModelParams& b) {
  std::vector<std::span<const double>> va, vb;
  visit_model_params(a, [&](const std::string&, std::span<const double> v, std::size_t, std::size_t) { va.push_back(v); });
  visit_model_params(b, [&](const std::string&, std::span<const double> v, std::size_t, std::size_t) { vb.push_back(v); });
  if (va.size() != vb.size()) return false;
  for (std::size_t i = 0; i < va.size(); ++i) {
    if (va[i].size() != vb[i].size() || !std::equal(va[i].begin(), va[i].end(), vb[i].begin())) return false;
  }
  return true;
}

struct Thresholds {
  double detection = 0.5;
  double correction = 0.5;
};

/// Everything needed to run inference; this is what a checkpoint stores.
struct Model {
  Vocabulary vocab;
  EncoderConfig encoder;
  ModelParams params;
  Thresholds thresholds;
  ScoringOptions scoring;
  std::size_t evidence_k = 2;
};

/// Scores and loss for one encoded example, without gradients.
inline LossBreakdown example_loss(const Model& m, const EncodedExample& ex, const LabelSet& labels) {
  const auto bundle = encode(ex, m.params.encoder, m.encoder);
  return head_loss(score_heads(bundle, m.params.detection, m.params.correction), labels, m.scoring);
}

/// Adds the gradient of the example's total loss into `grads` and returns
/// the loss.
inline LossBreakdown example_loss_and_gradient(const Model& m, const EncodedExample& ex, const LabelSet& labels,
                                               ModelParams& grads) {
  const std::size_t d = m.encoder.d_model;
  const EncoderCache cache = encode_forward(ex, m.params.encoder, m.encoder);
  const EmbeddingBundle bundle = gather_bundle(ex, cache.h);
  const HeadScores scores = score_heads(bundle, m.params.detection, m.params.correction);

  HeadGradients hg{DetectionHead{Matrix(d, d), 0.0}, CorrectionHead{Matrix(d, d), 0.0}, Matrix(ex.ns(), d),
                   Matrix(ex.nv(), d), Matrix(1, d)};
  const LossBreakdown loss =
      head_loss_backward(bundle, scores, labels, m.scoring, m.params.detection, m.params.correction, hg);

  for (std::size_t i = 0; i < hg.detection.weight.size(); ++i) {
    grads.detection.weight.values()[i] += hg.detection.weight.values()[i];
    grads.correction.weight.values()[i] += hg.correction.weight.values()[i];
  }
  grads.detection.bias += hg.detection.bias;
  grads.correction.bias += hg.correction.bias;

  Matrix dh(cache.n, d);
  auto scatter = [&](const Matrix& rows, const std::vector<std::size_t>& marks) {
    for (std::size_t i = 0; i < marks.size(); ++i) {
      auto dst = dh.row(marks[i]);
      auto src = rows.row(i);
      for (std::size_t j = 0; j < d; ++j) dst[j] += src[j];
    }
  };
  scatter(hg.he_s, ex.summary_entity_marks);
  scatter(hg.he_v, ex.evidence_entity_marks);
  scatter(hg.h_err, {ex.is_error_pos});
  encode_backward(ex, cache, dh, m.params.encoder, m.encoder, grads.encoder);
  return loss;
}

}  // namespace entfix
