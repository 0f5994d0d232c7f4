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

// Single-file model archive. Every integer is little-endian.
//
//   magic        8 bytes  "ENTFIXCK"
//   version      u32      1
//   entry_count  u32
//   entry_count times:
//     name_len   u32, then name_len bytes of UTF-8
//     dtype      u8       1 = UTF-8 text, 2 = IEEE-754 float64
//     rank       u32, then rank x u64 dims (row-major)
//     byte_count u64, then the payload
//
// Entries, in order: "config" (JSON text), "vocab" (one token per line), then
// every parameter tensor as float64 with rank 2, in visit_model_params order
// (e.g. "encoder.token_embedding", "encoder.match_embedding",
// "encoder.layer0.attn.wq", ...,
// "detection.weight", "detection.bias", "correction.weight", "correction.bias").

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "entfix/errors.hpp"
#include "entfix/model.hpp"

namespace entfix {

inline constexpr char kCheckpointMagic[8] = {'E', 'N', 'T', 'F', 'I', 'X', 'C', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

namespace detail {

inline constexpr std::uint32_t kMaxNameBytes = 1024;
inline constexpr std::uint64_t kMaxEntryBytes = std::uint64_t{1} << 34;

}  // namespace detail

inline nlohmann::json to_json(const EncoderConfig& c) {
  return {{"d_model", c.d_model}, {"n_layers", c.n_layers}, {"n_heads", c.n_heads},
          {"d_ff", c.d_ff},       {"max_len", c.max_len},   {"vocab_size", c.vocab_size},
          {"match_feature", c.match_feature}};
}

/// Fields missing from `j` keep the values already in `c`.
inline void update_from_json(EncoderConfig& c, const nlohmann::json& j) {
  c.d_model = j.value("d_model", c.d_model);
  c.n_layers = j.value("n_layers", c.n_layers);
  c.n_heads = j.value("n_heads", c.n_heads);
  c.d_ff = j.value("d_ff", c.d_ff);
  c.max_len = j.value("max_len", c.max_len);
  c.vocab_size = j.value("vocab_size", c.vocab_size);
  c.match_feature = j.value("match_feature", c.match_feature);
}

inline nlohmann::json model_config_json(const Model& m) {
  return {{"encoder", to_json(m.encoder)},
          {"thresholds", {{"thr_det", m.thresholds.detection}, {"thr_cor", m.thresholds.correction}}},
          {"scoring", {{"mask_correction_rows", m.scoring.mask_correction_rows}, {"clamp_eps", m.scoring.clamp_eps}}},
          {"evidence_k", m.evidence_k}};
}

namespace detail {

template <typename T>
void put_le(std::ostream& out, T v) {
  static_assert(std::is_unsigned_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) out.put(static_cast<char>((v >> (8 * i)) & 0xFF));
}

template <typename T>
T get_le(std::istream& in) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    const int c = in.get();
    if (c == EOF) throw CheckpointError("truncated checkpoint");
    v |= static_cast<T>(static_cast<unsigned char>(c)) << (8 * i);
  }
  return v;
}

inline void put_entry_header(std::ostream& out, const std::string& name, std::uint8_t dtype,
                             const std::vector<std::uint64_t>& dims, std::uint64_t bytes) {
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_le<std::uint8_t>(out, dtype);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dims.size()));
  for (auto d : dims) put_le<std::uint64_t>(out, d);
  put_le<std::uint64_t>(out, bytes);
}

inline void put_text(std::ostream& out, const std::string& name, const std::string& text) {
  put_entry_header(out, name, 1, {text.size()}, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
}

struct Entry {
  std::uint8_t dtype = 0;
  std::vector<std::uint64_t> dims;
  std::string text;
  std::vector<double> values;
};

}  // namespace detail

inline void save_checkpoint(const Model& m, std::ostream& out, const nlohmann::json& extra = nlohmann::json::object()) {
  nlohmann::json config = model_config_json(m);
  if (!extra.empty()) config["run"] = extra;

  std::uint32_t count = 2;
  visit_model_params(m.params, [&](const std::string&, std::span<const double>, std::size_t, std::size_t) { ++count; });

  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  detail::put_le<std::uint32_t>(out, kCheckpointVersion);
  detail::put_le<std::uint32_t>(out, count);
  detail::put_text(out, "config", config.dump());
  detail::put_text(out, "vocab", m.vocab.serialize());
  visit_model_params(m.params, [&](const std::string& name, std::span<const double> v, std::size_t rows,
                                   std::size_t cols) {
    detail::put_entry_header(out, name, 2, {rows, cols}, v.size() * 8);
    for (double x : v) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(x));
  });
  if (!out) throw CheckpointError("error while writing checkpoint");
}

inline void save_checkpoint(const Model& m, const std::string& path,
                            const nlohmann::json& extra = nlohmann::json::object()) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  save_checkpoint(m, out, extra);
}

/// Loads a checkpoint; `config_out`, when given, receives the stored config
/// JSON (including any "run" section).
inline Model load_checkpoint(std::istream& in, nlohmann::json* config_out = nullptr) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) throw CheckpointError("not a checkpoint file");
  const auto version = detail::get_le<std::uint32_t>(in);
  if (version != kCheckpointVersion) throw CheckpointError("unsupported checkpoint version " + std::to_string(version));
  const auto count = detail::get_le<std::uint32_t>(in);

  std::map<std::string, detail::Entry> entries;
  for (std::uint32_t e = 0; e < count; ++e) {
    const auto name_len = detail::get_le<std::uint32_t>(in);
    if (!in || name_len > detail::kMaxNameBytes) throw CheckpointError("truncated or corrupt checkpoint");
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    detail::Entry entry;
    entry.dtype = detail::get_le<std::uint8_t>(in);
    const auto rank = detail::get_le<std::uint32_t>(in);
    for (std::uint32_t r = 0; r < rank; ++r) entry.dims.push_back(detail::get_le<std::uint64_t>(in));
    const auto bytes = detail::get_le<std::uint64_t>(in);
    if (!in || bytes > detail::kMaxEntryBytes) throw CheckpointError("truncated or corrupt checkpoint");
    if (entry.dtype == 1) {
      entry.text.resize(bytes);
      in.read(entry.text.data(), static_cast<std::streamsize>(bytes));
    } else if (entry.dtype == 2) {
      if (bytes % 8 != 0) throw CheckpointError("float64 entry '" + name + "' has a ragged payload");
      entry.values.resize(bytes / 8);
      for (auto& v : entry.values) v = std::bit_cast<double>(detail::get_le<std::uint64_t>(in));
    } else {
      throw CheckpointError("entry '" + name + "' has unknown dtype");
    }
    if (!in) throw CheckpointError("truncated checkpoint");
    entries.emplace(std::move(name), std::move(entry));
  }

  auto take = [&](const std::string& name) -> detail::Entry& {
    auto it = entries.find(name);
    if (it == entries.end()) throw CheckpointError("checkpoint lacks entry '" + name + "'");
    return it->second;
  };
  const nlohmann::json config = nlohmann::json::parse(take("config").text);
  Model m;
  update_from_json(m.encoder, config.at("encoder"));
  m.encoder.validate();
  m.thresholds.detection = config.at("thresholds").at("thr_det").get<double>();
  m.thresholds.correction = config.at("thresholds").at("thr_cor").get<double>();
  m.scoring.mask_correction_rows = config.at("scoring").at("mask_correction_rows").get<bool>();
  m.scoring.clamp_eps = config.at("scoring").at("clamp_eps").get<double>();
  m.evidence_k = config.at("evidence_k").get<std::size_t>();
  m.vocab = Vocabulary::deserialize(take("vocab").text);
  if (m.vocab.size() != m.encoder.vocab_size) throw CheckpointError("vocabulary size disagrees with the config");

  m.params = zero_model_params(m.encoder);
  visit_model_params(m.params, [&](const std::string& name, std::span<double> v, std::size_t rows, std::size_t cols) {
    const detail::Entry& e = take(name);
    if (e.dtype != 2 || e.dims != std::vector<std::uint64_t>{rows, cols} || e.values.size() != v.size())
      throw CheckpointError("entry '" + name + "' has the wrong shape");
    std::copy(e.values.begin(), e.values.end(), v.begin());
  });
  if (config_out) *config_out = config;
  return m;
}

inline Model load_checkpoint(const std::string& path, nlohmann::json* config_out = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_checkpoint(in, config_out);
}

}  // namespace entfix
