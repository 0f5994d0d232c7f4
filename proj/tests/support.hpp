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

// Independent oracles and shared helpers for the test binaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entfix/entfix.hpp"

namespace entfix::testing {

inline std::string fixture(const std::string& name) { return std::string(ENTFIX_FIXTURE_DIR) + "/" + name; }
inline std::string data_file(const std::string& name) { return std::string(ENTFIX_DATA_DIR) + "/" + name; }

inline nlohmann::json read_json(const std::string& path) {
  std::ifstream in(path);
  return nlohmann::json::parse(in);
}

/// LCS by trying every subsequence of `a` (2^|a| masks) against `b`.
inline std::size_t brute_force_lcs(const std::vector<std::string>& a, const std::vector<std::string>& b) {
  std::size_t best = 0;
  for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
    std::size_t len = 0, j = 0;
    bool ok = true;
    for (std::size_t i = 0; i < a.size() && ok; ++i) {
      if (!(mask & (1u << i))) continue;
      while (j < b.size() && b[j] != a[i]) ++j;
      if (j == b.size()) {
        ok = false;
      } else {
        ++j;
        ++len;
      }
    }
    if (ok) best = std::max(best, len);
  }
  return best;
}

/// ROUGE-L F1 computed from a given LCS length.
inline double f1_from_lcs(std::size_t lcs, std::size_t cand, std::size_t ref) {
  const double l = static_cast<double>(lcs);
  const double p = cand == 0 ? 0.0 : l / static_cast<double>(cand);
  const double r = ref == 0 ? 0.0 : l / static_cast<double>(ref);
  return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
}

inline std::vector<std::string> random_tokens(Rng& rng, std::size_t max_len, std::size_t alphabet) {
  std::vector<std::string> out(rng.uniform_index(max_len + 1));
  for (auto& t : out) t = std::string(1, static_cast<char>('a' + rng.uniform_index(alphabet)));
  return out;
}

/// Scalar binary cross-entropy with clamping, one term at a time.
inline double scalar_bce(double p, double y, double eps = 1e-7) {
  const double q = std::min(std::max(p, eps), 1.0 - eps);
  return -(y * std::log(q) + (1.0 - y) * std::log(1.0 - q));
}

/// A random encoded example over a vocabulary of `vocab_size` ids, with
/// `ns` summary marks before the probe token and `nv` evidence marks after.
inline EncodedExample random_example(Rng& rng, const EncoderConfig& c, std::size_t ns, std::size_t nv) {
  EncodedExample ex;
  const std::size_t min_len = 2 * ns + 2 * nv + 3;
  const std::size_t len = min_len + rng.uniform_index(c.max_len - min_len + 1);
  std::vector<TokenId> ids(len);
  for (auto& id : ids) {
    id = static_cast<TokenId>(Vocabulary::kReserved + rng.uniform_index(c.vocab_size - Vocabulary::kReserved));
  }
  ex.is_error_pos = 2 * ns + rng.uniform_index(len - min_len + 1);
  ids[ex.is_error_pos] = Vocabulary::kIsError;
  for (std::size_t i = 0; i < ns; ++i) ex.summary_entity_marks.push_back(2 * i);
  for (std::size_t j = 0; j < nv; ++j) {
    ex.evidence_entity_marks.push_back(ex.is_error_pos + 1 + 2 * j);
    ex.evidence_entity_ids.push_back(j);
  }
  for (std::size_t m : ex.summary_entity_marks) ids[m] = Vocabulary::kEntityStart;
  for (std::size_t m : ex.evidence_entity_marks) ids[m] = Vocabulary::kEntityStart;
  ex.attention_len = len;
  ex.match_flags = detail::match_flags(ids, ex.is_error_pos);
  ex.match_flags.resize(c.max_len, 0);
  ids.resize(c.max_len, Vocabulary::kPad);
  ex.token_ids = std::move(ids);
  return ex;
}

/// Labels with at least one erroneous entity; each erroneous row gets one
/// correction target.
inline LabelSet random_labels(Rng& rng, std::size_t ns, std::size_t nv) {
  LabelSet l{std::vector<double>(ns, 0.0), Matrix(ns, nv)};
  for (std::size_t i = 0; i < ns; ++i) l.s_err[i] = rng.bernoulli(0.5) ? 1.0 : 0.0;
  l.s_err[rng.uniform_index(ns)] = 1.0;
  for (std::size_t i = 0; i < ns; ++i) {
    if (l.s_err[i] == 1.0 && nv > 0) l.s_cor.row(i)[rng.uniform_index(nv)] = 1.0;
  }
  return l;
}

inline EncoderConfig gradcheck_config() {
  EncoderConfig c;
  c.d_model = 8;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 16;
  c.max_len = 32;
  c.vocab_size = 50;
  return c;
}

/// A model with random parameters over `config`, without a vocabulary.
inline Model random_model(const EncoderConfig& config, std::uint64_t seed, double head_scale = 1.0) {
  Model m;
  m.encoder = config;
  Rng rng(seed);
  m.params = init_model_params(config, rng);
  for (double& w : m.params.detection.weight.values()) w *= head_scale;
  for (double& w : m.params.correction.weight.values()) w *= head_scale;
  m.params.detection.bias = rng.uniform(-0.5, 0.5);
  m.params.correction.bias = rng.uniform(-0.5, 0.5);
  return m;
}

struct GradcheckResult {
  double worst_relative_error = 0.0;
  std::string worst_parameter;
  std::size_t checked = 0;
};

/// Central finite differences of the total loss against the analytic
/// gradient for every scalar parameter. One Richardson step over h and h/2
/// cancels the second-order truncation term. Relative error uses a
/// denominator floor so entries whose gradient is exactly zero compare
/// absolutely.
inline GradcheckResult gradient_check(Model& m, const EncodedExample& ex, const LabelSet& labels, double h = 1e-3,
                                      double floor = 1e-6) {
  ModelParams grads = zero_model_params(m.encoder);
  example_loss_and_gradient(m, ex, labels, grads);
  std::vector<std::string> names;
  visit_model_params(m.params, [&](const std::string& n, auto&&...) { names.push_back(n); });
  const auto pv = parameter_views(m.params);
  const auto gv = parameter_views(grads);
  GradcheckResult r;
  for (std::size_t k = 0; k < pv.size(); ++k) {
    for (std::size_t i = 0; i < pv[k].size(); ++i) {
      const double old = pv[k][i];
      auto central = [&](double step) {
        pv[k][i] = old + step;
        const double up = example_loss(m, ex, labels).total();
        pv[k][i] = old - step;
        const double down = example_loss(m, ex, labels).total();
        pv[k][i] = old;
        return (up - down) / (2.0 * step);
      };
      const double numeric = (4.0 * central(h / 2.0) - central(h)) / 3.0;
      const double analytic = gv[k][i];
      const double rel = std::abs(numeric - analytic) / std::max({std::abs(numeric), std::abs(analytic), floor});
      ++r.checked;
      if (rel > r.worst_relative_error) {
        r.worst_relative_error = rel;
        r.worst_parameter = names[k] + "[" + std::to_string(i) + "]";
      }
    }
  }
  return r;
}

inline std::vector<Triple> load_triples(const std::string& fixture_name) { return read_triples(fixture(fixture_name)); }

/// Small encoder used by the fast pipeline tests.
inline EncoderConfig toy_config() {
  EncoderConfig c;
  c.d_model = 32;
  c.n_layers = 1;
  c.n_heads = 2;
  c.d_ff = 64;
  c.max_len = 256;
  return c;
}

}  // namespace entfix::testing
