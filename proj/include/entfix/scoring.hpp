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

// Bilinear detection/correction heads and the joint binary cross-entropy
// objective.
//
//   erroneous score   p_i  = sigmoid(h_es_i^T W_det h_err  + b_det)
//   correction score  q_ij = sigmoid(h_es_i^T W_cor h_ev_j + b_cor)
//   L = mean_i BCE(p_i, s_i) + mean_{i in rows, j} BCE(q_ij, c_ij)
//
// By default the correction term only covers rows of entities labelled as
// errors; ScoringOptions::mask_correction_rows = false averages over all
// ns * nv pairs instead.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "entfix/encoder.hpp"
#include "entfix/errors.hpp"
#include "entfix/matrix.hpp"
#include "entfix/rng.hpp"

namespace entfix {

struct DetectionHead {
  Matrix weight;  // d x d
  double bias = 0.0;
};

struct CorrectionHead {
  Matrix weight;  // d x d
  double bias = 0.0;
};

template <typename Head>
Head init_head(std::size_t d, Rng& rng) {
  Head h{Matrix(d, d), 0.0};
  for (auto& v : h.weight.values()) v = rng.uniform(-0.05, 0.05);
  return h;
}

struct ScoringOptions {
  bool mask_correction_rows = true;
  double clamp_eps = 1e-7;
};

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

namespace detail {

inline double bilinear_score(std::span<const double> x, const Matrix& w, double b, std::span<const double> y) {
  if (x.size() != w.rows() || y.size() != w.cols())
    throw DimensionMismatch("head expects " + std::to_string(w.rows()) + "-dimensional inputs");
  return sigmoid(bilinear(x, w, y) + b);
}

}  // namespace detail

inline double detection_score(std::span<const double> h_es, std::span<const double> h_err, const DetectionHead& head) {
  return detail::bilinear_score(h_es, head.weight, head.bias, h_err);
}

inline double correction_score(std::span<const double> h_es, std::span<const double> h_ev,
                               const CorrectionHead& head) {
  return detail::bilinear_score(h_es, head.weight, head.bias, h_ev);
}

/// Ground-truth labels: s_err (ns) and s_cor (ns x nv), all entries 0 or 1.
struct LabelSet {
  std::vector<double> s_err;
  Matrix s_cor;

  /// Throws InvalidAnnotation unless every entry is 0/1, each s_cor row has
  /// at most one 1, and rows of non-error entities are all zero.
  void validate() const {
    if (s_cor.rows() != s_err.size()) throw InvalidAnnotation("label shapes disagree");
    for (std::size_t i = 0; i < s_err.size(); ++i) {
      if (s_err[i] != 0.0 && s_err[i] != 1.0) throw InvalidAnnotation("detection label must be 0 or 1");
      double row = 0.0;
      for (double v : s_cor.row(i)) {
        if (v != 0.0 && v != 1.0) throw InvalidAnnotation("correction label must be 0 or 1");
        row += v;
      }
      if (row > 1.0) throw InvalidAnnotation("more than one correct replacement for an entity");
      if (s_err[i] == 0.0 && row != 0.0) throw InvalidAnnotation("correction target on a non-error entity");
    }
  }
};

inline double binary_cross_entropy(double p, double label, double eps = 1e-7) {
  const double pc = std::clamp(p, eps, 1.0 - eps);
  return -(label * std::log(pc) + (1.0 - label) * std::log(1.0 - pc));
}

/// Mean BCE over the ns summary entities. Throws EmptyPrediction for ns = 0.
inline double detection_loss(std::span<const double> predictions, std::span<const double> labels,
                             double eps = 1e-7) {
  if (predictions.empty()) throw EmptyPrediction();
  if (predictions.size() != labels.size()) throw DimensionMismatch("detection predictions and labels differ in size");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) sum += binary_cross_entropy(predictions[i], labels[i], eps);
  return sum / static_cast<double>(predictions.size());
}

/// Mean BCE over the selected rows and all nv columns; 0 when no row is
/// selected.
inline double correction_loss(const Matrix& predictions, const Matrix& labels, const std::vector<bool>& rows,
                              double eps = 1e-7) {
  if (predictions.rows() != labels.rows() || predictions.cols() != labels.cols() || rows.size() != labels.rows())
    throw DimensionMismatch("correction predictions, labels and row mask differ in shape");
  const auto selected = static_cast<std::size_t>(std::count(rows.begin(), rows.end(), true));
  if (selected == 0) return 0.0;
  if (predictions.cols() == 0) throw DimensionMismatch("correction loss needs at least one candidate");
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.rows(); ++i) {
    if (!rows[i]) continue;
    for (std::size_t j = 0; j < predictions.cols(); ++j)
      sum += binary_cross_entropy(predictions(i, j), labels(i, j), eps);
  }
  return sum / static_cast<double>(selected * predictions.cols());
}

inline double total_loss(double detection, double correction) { return detection + correction; }

/// Every detection and correction score for one example.
struct HeadScores {
  std::vector<double> detection;  // ns
  Matrix correction;              // ns x nv
};

inline HeadScores score_heads(const EmbeddingBundle& b, const DetectionHead& det, const CorrectionHead& cor) {
  HeadScores s;
  const std::size_t ns = b.he_s.rows(), nv = b.he_v.rows();
  s.detection.resize(ns);
  s.correction = Matrix(ns, nv);
  for (std::size_t i = 0; i < ns; ++i) {
    s.detection[i] = detection_score(b.he_s.row(i), b.h_err.row(0), det);
    for (std::size_t j = 0; j < nv; ++j) s.correction(i, j) = correction_score(b.he_s.row(i), b.he_v.row(j), cor);
  }
  return s;
}

struct LossBreakdown {
  double detection = 0.0;
  double correction = 0.0;
  double total() const { return total_loss(detection, correction); }
};

inline std::vector<bool> correction_rows(const LabelSet& labels, const ScoringOptions& opt) {
  std::vector<bool> rows(labels.s_err.size(), true);
  if (opt.mask_correction_rows) {
    for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = labels.s_err[i] == 1.0;
  }
  return rows;
}

/// Loss of one example. An example with no summary entities contributes 0
/// to the detection term.
inline LossBreakdown head_loss(const HeadScores& s, const LabelSet& labels, const ScoringOptions& opt) {
  LossBreakdown out;
  if (!s.detection.empty()) out.detection = detection_loss(s.detection, labels.s_err, opt.clamp_eps);
  if (s.correction.cols() > 0)
    out.correction = correction_loss(s.correction, labels.s_cor, correction_rows(labels, opt), opt.clamp_eps);
  return out;
}

/// Gradients of the heads' parameters and of the gathered embeddings.
struct HeadGradients {
  DetectionHead detection;
  CorrectionHead correction;
  Matrix he_s, he_v, h_err;
};

namespace detail {

// d BCE / d logit, zero where the clamp is active.
inline double bce_logit_grad(double p, double label, double eps) {
  if (p <= eps || p >= 1.0 - eps) return 0.0;
  return p - label;
}

inline void bilinear_backward(double g, std::span<const double> x, const Matrix& w, std::span<const double> y,
                              Matrix& dw, double& db, std::span<double> dx, std::span<double> dy) {
  if (g == 0.0) return;
  db += g;
  for (std::size_t i = 0; i < w.rows(); ++i) {
    auto wr = w.row(i);
    auto dwr = dw.row(i);
    double wy = 0.0;
    for (std::size_t j = 0; j < w.cols(); ++j) {
      dwr[j] += g * x[i] * y[j];
      wy += wr[j] * y[j];
      dy[j] += g * x[i] * wr[j];
    }
    dx[i] += g * wy;
  }
}

}  // namespace detail

/// Adds the gradient of head_loss into `grads` (whose matrices must already
/// have the right shapes) and returns the loss.
inline LossBreakdown head_loss_backward(const EmbeddingBundle& b, const HeadScores& s, const LabelSet& labels,
                                        const ScoringOptions& opt, const DetectionHead& det,
                                        const CorrectionHead& cor, HeadGradients& grads) {
  const LossBreakdown loss = head_loss(s, labels, opt);
  const std::size_t ns = s.detection.size(), nv = s.correction.cols();
  if (ns > 0) {
    const double inv = 1.0 / static_cast<double>(ns);
    for (std::size_t i = 0; i < ns; ++i) {
      const double g = detail::bce_logit_grad(s.detection[i], labels.s_err[i], opt.clamp_eps) * inv;
      detail::bilinear_backward(g, b.he_s.row(i), det.weight, b.h_err.row(0), grads.detection.weight,
                                grads.detection.bias, grads.he_s.row(i), grads.h_err.row(0));
    }
  }
  const auto rows = correction_rows(labels, opt);
  const auto selected = static_cast<std::size_t>(std::count(rows.begin(), rows.end(), true));
  if (nv > 0 && selected > 0) {
    const double inv = 1.0 / static_cast<double>(selected * nv);
    for (std::size_t i = 0; i < ns; ++i) {
      if (!rows[i]) continue;
      for (std::size_t j = 0; j < nv; ++j) {
        const double g = detail::bce_logit_grad(s.correction(i, j), labels.s_cor(i, j), opt.clamp_eps) * inv;
        detail::bilinear_backward(g, b.he_s.row(i), cor.weight, b.he_v.row(j), grads.correction.weight,
                                  grads.correction.bias, grads.he_s.row(i), grads.he_v.row(j));
      }
    }
  }
  return loss;
}

}  // namespace entfix
