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

// JSON-lines corpus and triples files. Offsets on disk are code points.
//
//   document: {"id", "article": T, "summary": T}
//   triple:   {"id", "input_summary": T, "article": T, "target_summary": T,
//              "corruption": null | {"entity_index", "original_surface",
//                                    "replacement_surface", "type"}}
//   T:        {"text", "sentences": [[s, e], ...],
//              "entities": [{"start", "end", "type"}, ...]}
//
// A T object without "sentences" is segmented; one without "entities" is run
// through the fallback tagger.

#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "entfix/corpus.hpp"
#include "entfix/utf8.hpp"

namespace entfix {

using json = nlohmann::json;

inline json to_json(const AnnotatedText& doc) {
  const auto bounds = utf8::boundaries(doc.text);
  json sentences = json::array();
  for (const auto& s : doc.sentences) {
    sentences.push_back({utf8::to_code_point(bounds, s.start), utf8::to_code_point(bounds, s.end)});
  }
  json entities = json::array();
  for (const auto& e : doc.entities) {
    entities.push_back({{"start", utf8::to_code_point(bounds, e.start)},
                        {"end", utf8::to_code_point(bounds, e.end)},
                        {"type", std::string(to_string(e.etype))}});
  }
  return {{"text", doc.text}, {"sentences", std::move(sentences)}, {"entities", std::move(entities)}};
}

/// Accepts a full annotation object, an object with only some of
/// "sentences"/"entities" (the rest is derived), or a bare string.
namespace detail {

inline std::size_t span_byte(const std::vector<std::size_t>& bounds, const json& offset) {
  const std::size_t cp = offset.get<std::size_t>();
  if (cp >= bounds.size()) throw InvalidAnnotation("offset " + std::to_string(cp) + " past end of text");
  return bounds[cp];
}

}  // namespace detail

inline AnnotatedText annotated_from_json(const json& j) {
  if (j.is_string()) return annotate(j.get<std::string>());
  std::string text = j.at("text").get<std::string>();
  if (!j.contains("sentences") && !j.contains("entities")) return annotate(std::move(text));

  const auto bounds = utf8::boundaries(text);
  AnnotatedText doc;
  if (j.contains("sentences")) {
    for (const auto& r : j.at("sentences")) {
      doc.sentences.push_back(SentenceRange{detail::span_byte(bounds, r.at(0)), detail::span_byte(bounds, r.at(1))});
    }
  } else {
    doc.sentences = segment_sentences(text);
  }
  if (j.contains("entities")) {
    for (const auto& e : j.at("entities")) {
      const std::size_t b = detail::span_byte(bounds, e.at("start"));
      const std::size_t en = detail::span_byte(bounds, e.at("end"));
      if (b > en) throw InvalidAnnotation("entity start after end");
      doc.entities.push_back(
          EntitySpan{b, en, text.substr(b, en - b), parse_entity_type(e.at("type").get<std::string>())});
    }
  } else {
    for (auto& e : tag_entities(text)) {
      const bool inside = std::any_of(doc.sentences.begin(), doc.sentences.end(), [&](const SentenceRange& r) {
        return r.start <= e.start && e.end <= r.end;
      });
      if (inside) doc.entities.push_back(std::move(e));
    }
  }
  doc.text = std::move(text);
  validate(doc);
  return doc;
}

inline json to_json(const Document& d) {
  return {{"id", d.id}, {"article", to_json(d.article)}, {"summary", to_json(d.summary)}};
}

inline Document document_from_json(const json& j) {
  return Document{j.at("id").get<std::string>(), annotated_from_json(j.at("article")),
                  annotated_from_json(j.at("summary"))};
}

inline json to_json(const CorruptionRecord& r) {
  return {{"entity_index", r.entity_index},
          {"original_surface", r.original_surface},
          {"replacement_surface", r.replacement_surface},
          {"type", std::string(to_string(r.etype))}};
}

inline json to_json(const Triple& t) {
  return {{"id", t.id},
          {"input_summary", to_json(t.input_summary)},
          {"article", to_json(t.article)},
          {"target_summary", to_json(t.target_summary)},
          {"corruption", t.corruption ? to_json(*t.corruption) : json(nullptr)}};
}

inline Triple triple_from_json(const json& j) {
  Triple t;
  t.id = j.at("id").get<std::string>();
  t.input_summary = annotated_from_json(j.at("input_summary"));
  t.article = annotated_from_json(j.at("article"));
  t.target_summary = annotated_from_json(j.at("target_summary"));
  const auto& c = j.at("corruption");
  if (!c.is_null()) {
    t.corruption = CorruptionRecord{c.at("entity_index").get<std::size_t>(),
                                    c.at("original_surface").get<std::string>(),
                                    c.at("replacement_surface").get<std::string>(),
                                    parse_entity_type(c.at("type").get<std::string>())};
  }
  return t;
}

/// Reads one JSON value per non-blank line. Throws std::runtime_error with
/// the path and line number on unreadable files or malformed lines.
inline std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<json> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::parse_error& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

inline void write_jsonl(const std::string& path, const std::vector<json>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw std::runtime_error("error while writing " + path);
}

inline std::vector<Document> read_documents(const std::string& path) {
  std::vector<Document> docs;
  for (const auto& j : read_jsonl(path)) docs.push_back(document_from_json(j));
  return docs;
}

inline std::vector<Triple> read_triples(const std::string& path) {
  std::vector<Triple> triples;
  for (const auto& j : read_jsonl(path)) triples.push_back(triple_from_json(j));
  return triples;
}

}  // namespace entfix
