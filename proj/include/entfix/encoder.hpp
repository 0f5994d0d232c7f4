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

// Marked input assembly [summary; <IsError>; evidence] and the built-in
// transformer encoder with hand-written backpropagation.
//
// The encoder is pre-norm: x += MHA(LN(x)); x += FFN(LN(x)); H = LN(x).
// Token embeddings are scaled by sqrt(d_model) and added to fixed sinusoidal
// position encodings. With match_feature on, each position also gets a
// learned embedding of its exact-match flag: whether the same word id occurs
// on the other side of <IsError>. The FFN uses the tanh approximation of GELU.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "entfix/corpus.hpp"
#include "entfix/errors.hpp"
#include "entfix/matrix.hpp"
#include "entfix/retrieval.hpp"
#include "entfix/rng.hpp"
#include "entfix/text.hpp"
#include "entfix/vocab.hpp"

namespace entfix {

struct EncoderConfig {
  std::size_t d_model = 64;
  std::size_t n_layers = 2;
  std::size_t n_heads = 4;
  std::size_t d_ff = 128;
  std::size_t max_len = 256;
  std::size_t vocab_size = 0;
  bool match_feature = true;  // add the cross-segment exact-match embedding

  void validate() const {
    if (d_model == 0 || n_heads == 0 || d_model % n_heads != 0)
      throw std::invalid_argument("d_model must be a positive multiple of n_heads");
    if (max_len < 16) throw std::invalid_argument("max_len must be at least 16");
    if (d_ff == 0) throw std::invalid_argument("d_ff must be positive");
    if (vocab_size < Vocabulary::kReserved) throw std::invalid_argument("vocab_size is smaller than the reserved set");
  }

  friend bool operator==(const EncoderConfig&, const EncoderConfig&) = default;
};

/// Token ids for one example plus the positions the heads read from.
struct EncodedExample {
  std::vector<TokenId> token_ids;  // padded to max_len with <pad>
  std::vector<std::size_t> summary_entity_marks;
  std::vector<std::size_t> evidence_entity_marks;
  std::vector<std::size_t> evidence_entity_ids;  // EvidenceSet::entities index of each mark
  std::size_t is_error_pos = 0;
  std::size_t attention_len = 0;
  std::vector<std::uint8_t> match_flags;  // 1 where a word's id also occurs across <IsError>

  std::size_t ns() const { return summary_entity_marks.size(); }
  std::size_t nv() const { return evidence_entity_marks.size(); }
};

namespace detail {

// An atomic piece of the input: one word token, or a whole wrapped entity.
struct InputUnit {
  std::vector<TokenId> ids;
  std::optional<std::size_t> entity;
};

inline void append_words(std::string_view s, const Vocabulary& vocab, std::vector<InputUnit>& out) {
  for (const auto& tok : text::word_tokens(s)) out.push_back(InputUnit{{vocab.id(tok.text)}, std::nullopt});
}

// Units for text[begin, end) with the entities in [first, last) wrapped in
// <s> ... <e>. Entities must lie inside the range.
inline std::vector<InputUnit> units_for(std::string_view s, std::size_t begin, std::size_t end,
                                        const std::vector<EntitySpan>& entities, std::size_t first,
                                        std::size_t last, const Vocabulary& vocab) {
  std::vector<InputUnit> out;
  std::size_t cursor = begin;
  for (std::size_t e = first; e < last; ++e) {
    const EntitySpan& span = entities[e];
    append_words(s.substr(cursor, span.start - cursor), vocab, out);
    InputUnit unit{{Vocabulary::kEntityStart}, e};
    for (const auto& tok : text::word_tokens(s.substr(span.start, span.end - span.start)))
      unit.ids.push_back(vocab.id(tok.text));
    unit.ids.push_back(Vocabulary::kEntityEnd);
    out.push_back(std::move(unit));
    cursor = span.end;
  }
  append_words(s.substr(cursor, end - cursor), vocab, out);
  return out;
}

// Marks word tokens whose id appears on the other side of the probe token.
// Reserved ids, including <unk>, never match.
inline std::vector<std::uint8_t> match_flags(const std::vector<TokenId>& ids, std::size_t split) {
  std::unordered_set<TokenId> left, right;
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < static_cast<TokenId>(Vocabulary::kReserved)) continue;
    (t < split ? left : right).insert(ids[t]);
  }
  std::vector<std::uint8_t> flags(ids.size(), 0);
  for (std::size_t t = 0; t < ids.size(); ++t) {
    if (t == split || ids[t] < static_cast<TokenId>(Vocabulary::kReserved)) continue;
    flags[t] = (t < split ? right : left).count(ids[t]) ? 1 : 0;
  }
  return flags;
}

}  // namespace detail

/// Assembles [summary; <IsError>; evidence] with every entity wrapped in
/// <s> ... <e>. Evidence is cut at the last sentence boundary that fits; if
/// not even the first evidence sentence fits, its longest prefix of whole
/// units is kept, so an entity is never cut in half. Throws SummaryTooLong
/// when the summary and probe token alone exceed max_len.
inline EncodedExample build_input(const AnnotatedText& summary, const EvidenceSet& evidence, const Vocabulary& vocab,
                                  const EncoderConfig& config) {
  EncodedExample ex;
  std::vector<TokenId> ids;
  for (auto& unit : detail::units_for(summary.text, 0, summary.text.size(), summary.entities, 0,
                                      summary.entities.size(), vocab)) {
    if (unit.entity) ex.summary_entity_marks.push_back(ids.size());
    ids.insert(ids.end(), unit.ids.begin(), unit.ids.end());
  }
  if (ids.size() + 1 > config.max_len) throw SummaryTooLong(ids.size() + 1, config.max_len);
  ex.is_error_pos = ids.size();
  ids.push_back(Vocabulary::kIsError);

  std::size_t next_entity = 0;
  for (std::size_t k = 0; k < evidence.sentences.size(); ++k) {
    std::size_t last_entity = next_entity;
    while (last_entity < evidence.entities.size() && evidence.entity_sentence[last_entity] == k) ++last_entity;
    const auto units = detail::units_for(evidence.text, evidence.sentences[k].start, evidence.sentences[k].end,
                                         evidence.entities, next_entity, last_entity, vocab);
    next_entity = last_entity;

    std::size_t total = 0;
    for (const auto& u : units) total += u.ids.size();
    const std::size_t budget = config.max_len - ids.size();
    const bool fits = total <= budget;
    if (!fits && k > 0) break;
    std::size_t used = 0;
    for (const auto& u : units) {
      if (used + u.ids.size() > budget) break;
      if (u.entity) {
        ex.evidence_entity_marks.push_back(ids.size());
        ex.evidence_entity_ids.push_back(*u.entity);
      }
      ids.insert(ids.end(), u.ids.begin(), u.ids.end());
      used += u.ids.size();
    }
    if (!fits) break;
  }

  ex.attention_len = ids.size();
  ex.match_flags = detail::match_flags(ids, ex.is_error_pos);
  ex.match_flags.resize(config.max_len, 0);
  ids.resize(config.max_len, Vocabulary::kPad);
  ex.token_ids = std::move(ids);
  return ex;
}

struct LayerParams {
  Matrix ln1_gain, ln1_bias;
  Matrix wq, bq, wk, bk, wv, bv, wo, bo;
  Matrix ln2_gain, ln2_bias;
  Matrix w1, b1, w2, b2;
};

struct EncoderParams {
  Matrix token_embedding;  // vocab_size x d_model
  Matrix match_embedding;  // 2 x d_model, indexed by the match flag
  std::vector<LayerParams> layers;
  Matrix final_gain, final_bias;
};

/// Calls f(name, matrix) for every parameter in a fixed order. The names are
/// the checkpoint entry names.
template <typename Params, typename F>
void visit_encoder_params(Params& p, F&& f) {
  f(std::string("encoder.token_embedding"), p.token_embedding);
  f(std::string("encoder.match_embedding"), p.match_embedding);
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    auto& L = p.layers[l];
    const std::string prefix = "encoder.layer" + std::to_string(l) + ".";
    f(prefix + "ln1.gain", L.ln1_gain);
    f(prefix + "ln1.bias", L.ln1_bias);
    f(prefix + "attn.wq", L.wq);
    f(prefix + "attn.bq", L.bq);
    f(prefix + "attn.wk", L.wk);
    f(prefix + "attn.bk", L.bk);
    f(prefix + "attn.wv", L.wv);
    f(prefix + "attn.bv", L.bv);
    f(prefix + "attn.wo", L.wo);
    f(prefix + "attn.bo", L.bo);
    f(prefix + "ln2.gain", L.ln2_gain);
    f(prefix + "ln2.bias", L.ln2_bias);
    f(prefix + "ffn.w1", L.w1);
    f(prefix + "ffn.b1", L.b1);
    f(prefix + "ffn.w2", L.w2);
    f(prefix + "ffn.b2", L.b2);
  }
  f(std::string("encoder.final.gain"), p.final_gain);
  f(std::string("encoder.final.bias"), p.final_bias);
}

/// Zero-valued parameters of the right shapes (also used for gradients).
inline EncoderParams zero_encoder_params(const EncoderConfig& c) {
  const std::size_t d = c.d_model;
  EncoderParams p;
  p.token_embedding = Matrix(c.vocab_size, d);
  p.match_embedding = Matrix(2, d);
  for (std::size_t l = 0; l < c.n_layers; ++l) {
    LayerParams L;
    L.ln1_gain = L.ln1_bias = L.ln2_gain = L.ln2_bias = Matrix(1, d);
    L.wq = L.wk = L.wv = L.wo = Matrix(d, d);
    L.bq = L.bk = L.bv = L.bo = Matrix(1, d);
    L.w1 = Matrix(d, c.d_ff);
    L.b1 = Matrix(1, c.d_ff);
    L.w2 = Matrix(c.d_ff, d);
    L.b2 = Matrix(1, d);
    p.layers.push_back(std::move(L));
  }
  p.final_gain = p.final_bias = Matrix(1, d);
  return p;
}

/// Embeddings uniform(-0.05, 0.05); projections Glorot-uniform; biases zero;
/// layer-norm gains one.
inline EncoderParams init_encoder_params(const EncoderConfig& c, Rng& rng) {
  c.validate();
  EncoderParams p = zero_encoder_params(c);
  auto uniform = [&rng](Matrix& m, double a) {
    for (auto& v : m.values()) v = rng.uniform(-a, a);
  };
  auto glorot = [&](Matrix& m) { uniform(m, std::sqrt(6.0 / static_cast<double>(m.rows() + m.cols()))); };
  uniform(p.token_embedding, 0.05);
  uniform(p.match_embedding, 0.05);
  for (auto& L : p.layers) {
    L.ln1_gain.fill(1.0);
    L.ln2_gain.fill(1.0);
    glorot(L.wq);
    glorot(L.wk);
    glorot(L.wv);
    glorot(L.wo);
    glorot(L.w1);
    glorot(L.w2);
  }
  p.final_gain.fill(1.0);
  return p;
}

/// Contextual embeddings and the rows gathered for the heads.
struct EmbeddingBundle {
  Matrix h;     // token_ids.size() x d_model; rows past attention_len are zero
  Matrix he_s;  // ns x d_model
  Matrix he_v;  // nv x d_model
  Matrix h_err; // 1 x d_model
};

namespace detail {

inline constexpr double kLayerNormEps = 1e-5;

inline std::size_t flag_at(const EncodedExample& ex, std::size_t t) {
  return t < ex.match_flags.size() && ex.match_flags[t] ? 1 : 0;
}

inline double sinusoid(std::size_t pos, std::size_t i, std::size_t d) {
  const double rate = std::pow(10000.0, -static_cast<double>(2 * (i / 2)) / static_cast<double>(d));
  const double angle = static_cast<double>(pos) * rate;
  return (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
}

struct NormCache {
  Matrix hat;
  std::vector<double> rstd;
};

inline Matrix layer_norm(const Matrix& x, const Matrix& gain, const Matrix& bias, NormCache& cache) {
  const std::size_t n = x.rows(), d = x.cols();
  Matrix y(n, d);
  cache.hat = Matrix(n, d);
  cache.rstd.assign(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    auto r = x.row(i);
    double mean = 0.0;
    for (double v : r) mean += v;
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (double v : r) var += (v - mean) * (v - mean);
    var /= static_cast<double>(d);
    const double rstd = 1.0 / std::sqrt(var + kLayerNormEps);
    cache.rstd[i] = rstd;
    for (std::size_t j = 0; j < d; ++j) {
      const double hat = (r[j] - mean) * rstd;
      cache.hat(i, j) = hat;
      y(i, j) = hat * gain(0, j) + bias(0, j);
    }
  }
  return y;
}

inline Matrix layer_norm_backward(const Matrix& dy, const NormCache& cache, const Matrix& gain, Matrix& dgain,
                                  Matrix& dbias) {
  const std::size_t n = dy.rows(), d = dy.cols();
  Matrix dx(n, d);
  std::vector<double> dhat(d);
  for (std::size_t i = 0; i < n; ++i) {
    double mean_dhat = 0.0, mean_dhat_hat = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      const double g = dy(i, j);
      dgain(0, j) += g * cache.hat(i, j);
      dbias(0, j) += g;
      dhat[j] = g * gain(0, j);
      mean_dhat += dhat[j];
      mean_dhat_hat += dhat[j] * cache.hat(i, j);
    }
    mean_dhat /= static_cast<double>(d);
    mean_dhat_hat /= static_cast<double>(d);
    for (std::size_t j = 0; j < d; ++j) {
      dx(i, j) = cache.rstd[i] * (dhat[j] - mean_dhat - cache.hat(i, j) * mean_dhat_hat);
    }
  }
  return dx;
}

inline Matrix linear(const Matrix& x, const Matrix& w, const Matrix& b) {
  Matrix y;
  matmul(x, w, y);
  add_row_bias(y, b);
  return y;
}

// Accumulates dW and db; returns dx.
inline Matrix linear_backward(const Matrix& dy, const Matrix& x, const Matrix& w, Matrix& dw, Matrix& db) {
  matmul_tn_add(x, dy, dw);
  accumulate_column_sums(dy, db);
  Matrix dx;
  matmul_nt(dy, w, dx);
  return dx;
}

inline constexpr double kGeluC = 0.7978845608028654;  // sqrt(2 / pi)

inline double gelu(double u) { return 0.5 * u * (1.0 + std::tanh(kGeluC * (u + 0.044715 * u * u * u))); }

inline double gelu_grad(double u) {
  const double t = std::tanh(kGeluC * (u + 0.044715 * u * u * u));
  return 0.5 * (1.0 + t) + 0.5 * u * (1.0 - t * t) * kGeluC * (1.0 + 3.0 * 0.044715 * u * u);
}

struct LayerCache {
  NormCache ln1;
  Matrix a;  // LN1 output
  Matrix q, k, v;
  std::vector<Matrix> probs;  // per head, n x n
  Matrix ctx;
  NormCache ln2;
  Matrix b;  // LN2 output
  Matrix u;  // FFN pre-activation
  Matrix g;  // gelu(u)
};

}  // namespace detail

/// Intermediate activations kept for the backward pass; covers only the
/// first attention_len positions.
struct EncoderCache {
  std::size_t n = 0;
  std::vector<detail::LayerCache> layers;
  detail::NormCache final_norm;
  Matrix h;  // n x d
};

/// Forward pass over the non-pad prefix. Padding positions are excluded from
/// attention entirely, so appending pads never changes the result.
inline EncoderCache encode_forward(const EncodedExample& ex, const EncoderParams& p, const EncoderConfig& c) {
  const std::size_t n = ex.attention_len;
  const std::size_t d = c.d_model;
  const std::size_t heads = c.n_heads;
  const std::size_t dh = d / heads;
  const double emb_scale = std::sqrt(static_cast<double>(d));
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh));

  EncoderCache cache;
  cache.n = n;
  Matrix x(n, d);
  for (std::size_t t = 0; t < n; ++t) {
    const auto id = static_cast<std::size_t>(ex.token_ids[t]);
    if (id >= p.token_embedding.rows()) throw std::out_of_range("token id outside the vocabulary");
    auto e = p.token_embedding.row(id);
    for (std::size_t j = 0; j < d; ++j) x(t, j) = e[j] * emb_scale + detail::sinusoid(t, j, d);
    if (c.match_feature) {
      auto m = p.match_embedding.row(detail::flag_at(ex, t));
      for (std::size_t j = 0; j < d; ++j) x(t, j) += m[j] * emb_scale;
    }
  }

  for (const auto& L : p.layers) {
    detail::LayerCache lc;
    lc.a = detail::layer_norm(x, L.ln1_gain, L.ln1_bias, lc.ln1);
    lc.q = detail::linear(lc.a, L.wq, L.bq);
    lc.k = detail::linear(lc.a, L.wk, L.bk);
    lc.v = detail::linear(lc.a, L.wv, L.bv);
    lc.ctx = Matrix(n, d);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh;
      Matrix probs(n, n);
      for (std::size_t i = 0; i < n; ++i) {
        const double* qi = lc.q.row(i).data() + off;
        double mx = -INFINITY;
        for (std::size_t j = 0; j < n; ++j) {
          const double* kj = lc.k.row(j).data() + off;
          double s = 0.0;
          for (std::size_t r = 0; r < dh; ++r) s += qi[r] * kj[r];
          s *= att_scale;
          probs(i, j) = s;
          mx = std::max(mx, s);
        }
        double z = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          probs(i, j) = std::exp(probs(i, j) - mx);
          z += probs(i, j);
        }
        double* ci = lc.ctx.row(i).data() + off;
        for (std::size_t j = 0; j < n; ++j) {
          probs(i, j) /= z;
          const double* vj = lc.v.row(j).data() + off;
          for (std::size_t r = 0; r < dh; ++r) ci[r] += probs(i, j) * vj[r];
        }
      }
      lc.probs.push_back(std::move(probs));
    }
    const Matrix attn_out = detail::linear(lc.ctx, L.wo, L.bo);
    for (std::size_t i = 0; i < x.size(); ++i) x.values()[i] += attn_out.values()[i];

    lc.b = detail::layer_norm(x, L.ln2_gain, L.ln2_bias, lc.ln2);
    lc.u = detail::linear(lc.b, L.w1, L.b1);
    lc.g = Matrix(lc.u.rows(), lc.u.cols());
    for (std::size_t i = 0; i < lc.u.size(); ++i) lc.g.values()[i] = detail::gelu(lc.u.values()[i]);
    const Matrix ffn_out = detail::linear(lc.g, L.w2, L.b2);
    for (std::size_t i = 0; i < x.size(); ++i) x.values()[i] += ffn_out.values()[i];
    cache.layers.push_back(std::move(lc));
  }
  cache.h = detail::layer_norm(x, p.final_gain, p.final_bias, cache.final_norm);
  return cache;
}

/// Gathers the head inputs from the encoder output.
inline EmbeddingBundle gather_bundle(const EncodedExample& ex, const Matrix& h_prefix) {
  const std::size_t d = h_prefix.cols();
  EmbeddingBundle b;
  b.h = Matrix(ex.token_ids.size(), d);
  std::copy(h_prefix.values().begin(), h_prefix.values().end(), b.h.values().begin());
  auto gather = [&](const std::vector<std::size_t>& marks) {
    Matrix m(marks.size(), d);
    for (std::size_t i = 0; i < marks.size(); ++i) {
      auto src = h_prefix.row(marks[i]);
      std::copy(src.begin(), src.end(), m.row(i).begin());
    }
    return m;
  };
  b.he_s = gather(ex.summary_entity_marks);
  b.he_v = gather(ex.evidence_entity_marks);
  b.h_err = gather({ex.is_error_pos});
  return b;
}

inline EmbeddingBundle encode(const EncodedExample& ex, const EncoderParams& p, const EncoderConfig& c) {
  return gather_bundle(ex, encode_forward(ex, p, c).h);
}

/// Backpropagates dH (n x d, gradient w.r.t. the encoder output prefix) into
/// `grads`, which must have the shapes of `p`.
inline void encode_backward(const EncodedExample& ex, const EncoderCache& cache, const Matrix& dh,
                            const EncoderParams& p, const EncoderConfig& c, EncoderParams& grads) {
  const std::size_t n = cache.n;
  const std::size_t d = c.d_model;
  const std::size_t heads = c.n_heads;
  const std::size_t dh_size = d / heads;
  const double emb_scale = std::sqrt(static_cast<double>(d));
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dh_size));

  Matrix dx = detail::layer_norm_backward(dh, cache.final_norm, p.final_gain, grads.final_gain, grads.final_bias);

  for (std::size_t li = p.layers.size(); li-- > 0;) {
    const LayerParams& L = p.layers[li];
    LayerParams& G = grads.layers[li];
    const detail::LayerCache& lc = cache.layers[li];

    // FFN branch: x += W2 gelu(W1 LN2(x))
    Matrix dg = detail::linear_backward(dx, lc.g, L.w2, G.w2, G.b2);
    for (std::size_t i = 0; i < dg.size(); ++i) dg.values()[i] *= detail::gelu_grad(lc.u.values()[i]);
    Matrix db = detail::linear_backward(dg, lc.b, L.w1, G.w1, G.b1);
    Matrix dx_ffn = detail::layer_norm_backward(db, lc.ln2, L.ln2_gain, G.ln2_gain, G.ln2_bias);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.values()[i] += dx_ffn.values()[i];

    // Attention branch: x += Wo MHA(LN1(x))
    Matrix dctx = detail::linear_backward(dx, lc.ctx, L.wo, G.wo, G.bo);
    Matrix dq(n, d), dk(n, d), dv(n, d);
    std::vector<double> dp(n);
    for (std::size_t h = 0; h < heads; ++h) {
      const std::size_t off = h * dh_size;
      const Matrix& probs = lc.probs[h];
      for (std::size_t i = 0; i < n; ++i) {
        const double* dci = dctx.row(i).data() + off;
        double weighted = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double* vj = lc.v.row(j).data() + off;
          double s = 0.0;
          for (std::size_t r = 0; r < dh_size; ++r) s += dci[r] * vj[r];
          dp[j] = s;
          weighted += probs(i, j) * s;
          double* dvj = dv.row(j).data() + off;
          for (std::size_t r = 0; r < dh_size; ++r) dvj[r] += probs(i, j) * dci[r];
        }
        const double* qi = lc.q.row(i).data() + off;
        double* dqi = dq.row(i).data() + off;
        for (std::size_t j = 0; j < n; ++j) {
          const double ds = probs(i, j) * (dp[j] - weighted) * att_scale;
          if (ds == 0.0) continue;
          const double* kj = lc.k.row(j).data() + off;
          double* dkj = dk.row(j).data() + off;
          for (std::size_t r = 0; r < dh_size; ++r) {
            dqi[r] += ds * kj[r];
            dkj[r] += ds * qi[r];
          }
        }
      }
    }
    Matrix da = detail::linear_backward(dq, lc.a, L.wq, G.wq, G.bq);
    Matrix da_k = detail::linear_backward(dk, lc.a, L.wk, G.wk, G.bk);
    Matrix da_v = detail::linear_backward(dv, lc.a, L.wv, G.wv, G.bv);
    for (std::size_t i = 0; i < da.size(); ++i) da.values()[i] += da_k.values()[i] + da_v.values()[i];
    Matrix dx_attn = detail::layer_norm_backward(da, lc.ln1, L.ln1_gain, G.ln1_gain, G.ln1_bias);
    for (std::size_t i = 0; i < dx.size(); ++i) dx.values()[i] += dx_attn.values()[i];
  }

  for (std::size_t t = 0; t < n; ++t) {
    auto g = grads.token_embedding.row(static_cast<std::size_t>(ex.token_ids[t]));
    auto src = dx.row(t);
    for (std::size_t j = 0; j < d; ++j) g[j] += src[j] * emb_scale;
    if (c.match_feature) {
      auto gm = grads.match_embedding.row(detail::flag_at(ex, t));
      for (std::size_t j = 0; j < d; ++j) gm[j] += src[j] * emb_scale;
    }
  }
}

}  // namespace entfix
