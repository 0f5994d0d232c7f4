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

// Annotated documents, the rule-based fallback tagger, sentence splitting and
// synthetic same-type entity corruption.
//
// All offsets held in memory are byte offsets into UTF-8 text. The JSON
// formats in corpus_io.hpp use code-point offsets and convert at the edge.

#include <algorithm>
#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <utility>
#include <vector>

#include "entfix/errors.hpp"
#include "entfix/rng.hpp"
#include "entfix/text.hpp"

namespace entfix {

enum class EntityType { kPerson, kOrg, kLoc, kDate, kNumber, kMisc };

inline constexpr std::array<EntityType, 6> kAllEntityTypes = {
    EntityType::kPerson, EntityType::kOrg,    EntityType::kLoc,
    EntityType::kDate,   EntityType::kNumber, EntityType::kMisc};

inline std::string_view to_string(EntityType t) {
  switch (t) {
    case EntityType::kPerson: return "PERSON";
    case EntityType::kOrg: return "ORG";
    case EntityType::kLoc: return "LOC";
    case EntityType::kDate: return "DATE";
    case EntityType::kNumber: return "NUMBER";
    case EntityType::kMisc: return "MISC";
  }
  return "MISC";
}

inline EntityType parse_entity_type(std::string_view s) {
  for (auto t : kAllEntityTypes) {
    if (to_string(t) == s) return t;
  }
  throw InvalidAnnotation("unknown entity type '" + std::string(s) + "'");
}

struct EntitySpan {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string surface;
  EntityType etype = EntityType::kMisc;

  friend bool operator==(const EntitySpan&, const EntitySpan&) = default;
};

struct SentenceRange {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const SentenceRange&, const SentenceRange&) = default;
};

struct AnnotatedText {
  std::string text;
  std::vector<SentenceRange> sentences;
  std::vector<EntitySpan> entities;

  std::string_view slice(std::size_t start, std::size_t end) const {
    return std::string_view(text).substr(start, end - start);
  }
  std::string_view sentence_text(std::size_t i) const { return slice(sentences[i].start, sentences[i].end); }

  friend bool operator==(const AnnotatedText&, const AnnotatedText&) = default;
};

struct CorruptionRecord {
  std::size_t entity_index = 0;
  std::string original_surface;
  std::string replacement_surface;
  EntityType etype = EntityType::kMisc;

  friend bool operator==(const CorruptionRecord&, const CorruptionRecord&) = default;
};

/// A source document with its reference summary.
struct Document {
  std::string id;
  AnnotatedText article;
  AnnotatedText summary;
};

/// Training/evaluation unit: (input summary, article, target summary).
struct Triple {
  std::string id;
  AnnotatedText input_summary;
  AnnotatedText article;
  AnnotatedText target_summary;
  std::optional<CorruptionRecord> corruption;
};

using EntityPool = std::map<EntityType, std::set<std::string>>;

/// Throws InvalidAnnotation when any AnnotatedText invariant is broken.
inline void validate(const AnnotatedText& doc) {
  const std::size_t n = doc.text.size();
  std::size_t prev_end = 0;
  for (const auto& s : doc.sentences) {
    if (s.start >= s.end || s.end > n || s.start < prev_end)
      throw InvalidAnnotation("sentence ranges must be non-empty, sorted, disjoint and in bounds");
    prev_end = s.end;
  }
  prev_end = 0;
  for (const auto& e : doc.entities) {
    if (e.start >= e.end || e.end > n || e.start < prev_end)
      throw InvalidAnnotation("entity spans must be non-empty, sorted, disjoint and in bounds");
    if (doc.slice(e.start, e.end) != e.surface)
      throw InvalidAnnotation("entity surface '" + e.surface + "' does not match its text slice");
    const bool inside = std::any_of(doc.sentences.begin(), doc.sentences.end(), [&](const SentenceRange& s) {
      return s.start <= e.start && e.end <= s.end;
    });
    if (!inside) throw InvalidAnnotation("entity '" + e.surface + "' is not inside a single sentence");
    prev_end = e.end;
  }
}

namespace detail {

inline bool in_list(std::string_view word, std::initializer_list<std::string_view> list) {
  return std::find(list.begin(), list.end(), word) != list.end();
}

inline bool is_month(std::string_view w) {
  return in_list(w, {"January", "February", "March", "April", "May", "June", "July", "August", "September",
                     "October", "November", "December"});
}

inline bool is_weekday(std::string_view w) {
  return in_list(w, {"Monday", "Tuesday", "Wednesday", "Thursday", "Friday", "Saturday", "Sunday"});
}

inline bool is_title(std::string_view w) {
  return in_list(w, {"Mr", "Mrs", "Ms", "Dr", "Prof", "Sen", "Rep", "Gov", "Gen", "Lt", "Sgt", "Capt", "Col",
                     "President", "Senator", "Governor", "Judge", "Officer", "Professor", "Minister", "Detective",
                     "Coach", "Pope", "King", "Queen", "Prince", "Princess", "Sir", "Lady", "Lord", "Chancellor"});
}

// Capitalized function words that never start an entity.
inline bool is_capital_stopword(std::string_view w) {
  return in_list(w, {"The", "A", "An", "He", "She", "It", "They", "We", "I", "You", "His", "Her", "Its",
                     "Their", "Our", "My", "Your", "This", "That", "These", "Those", "But", "And", "Or", "So",
                     "If", "When", "While", "After", "Before", "As", "At", "In", "On", "For", "From", "To",
                     "With", "By", "Of", "There", "Here", "What", "Who", "Why", "How", "Where", "Some", "Many",
                     "Most", "All", "Both", "Each", "Yes", "No", "Not", "Also", "Then", "Now", "Last", "Next",
                     "Earlier", "Later", "However", "Meanwhile", "According", "During", "Despite", "Since",
                     "Until", "Although", "Officials", "Police", "Authorities", "Witnesses", "Residents"});
}

inline bool is_connector(std::string_view w) { return in_list(w, {"of", "de", "van", "von", "da", "del", "al"}); }

inline bool is_org_word(std::string_view w) {
  return in_list(w, {"Inc", "Corp", "Corporation", "Company", "Co", "Ltd", "LLC", "Group", "Bank", "University",
                     "College", "School", "Institute", "Association", "Foundation", "Council", "Committee",
                     "Commission", "Agency", "Department", "Ministry", "Party", "Club", "United", "FC", "Times",
                     "Post", "News", "Journal", "Press", "Network", "Airlines", "Airways", "Motors", "Army",
                     "Navy", "Court", "Senate", "Congress", "Parliament", "Hospital", "Church", "Society",
                     "Union", "Federation", "League", "Organization", "Organisation", "Service", "Services",
                     "Office", "Authority", "Board", "Cross", "Trust", "Fund", "Museum", "Orchestra"});
}

inline bool is_loc_word(std::string_view w) {
  return in_list(w, {"City", "County", "State", "Street", "Avenue", "Road", "River", "Lake", "Island", "Islands",
                     "Valley", "Mountain", "Mountains", "Beach", "Bay", "Province", "Region", "District",
                     "Coast", "Ocean", "Sea", "Desert", "Canyon", "Square", "Bridge", "Airport", "Kingdom",
                     "Republic", "America", "Britain", "England", "Scotland", "Wales", "Ireland", "France",
                     "Germany", "China", "Japan", "India", "Russia", "Canada", "Mexico", "Australia", "Italy",
                     "Spain", "Brazil", "Egypt", "Africa", "Europe", "Asia", "London", "Paris", "Berlin",
                     "Washington", "California", "Texas", "Florida", "Chicago", "Boston", "Denmark", "Sweden",
                     "Norway", "Poland", "Greece", "Turkey", "Iran", "Iraq", "Syria", "Israel", "Pakistan"});
}

inline bool is_locative_preposition(std::string_view w) {
  return in_list(w, {"in", "at", "from", "near", "to", "into", "across", "outside", "inside", "toward",
                     "towards", "throughout", "around", "across", "via"});
}

inline bool is_abbreviation(std::string_view w) {
  return in_list(w, {"Mr", "Mrs", "Ms", "Dr", "Prof", "Sr", "Jr", "St", "Sen", "Rep", "Gov", "Gen", "Lt", "Col",
                     "Sgt", "Capt", "Mt", "Ft", "Inc", "Corp", "Co", "Ltd", "vs", "etc", "No", "Jan", "Feb",
                     "Mar", "Apr", "Jun", "Jul", "Aug", "Sep", "Sept", "Oct", "Nov", "Dec", "U.S", "U.K",
                     "e.g", "i.e", "a.m", "p.m"});
}

struct Word {
  std::size_t begin;
  std::size_t end;
  std::string_view text;
};

// Words for tagging: word-character runs that may contain internal '-', and
// internal '.' or ',' between digits, and internal apostrophes other than a
// possessive "'s".
inline std::vector<Word> tagger_words(std::string_view s) {
  using text::is_digit;
  using text::is_word_char;
  std::vector<Word> words;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!is_word_char(s[i])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < s.size()) {
      const char c = s[j];
      if (is_word_char(c)) {
        ++j;
        continue;
      }
      const bool next_word = j + 1 < s.size() && is_word_char(s[j + 1]);
      if (!next_word) break;
      if (c == '-') {
        ++j;
      } else if ((c == '.' || c == ',') && is_digit(s[j - 1]) && is_digit(s[j + 1])) {
        ++j;
      } else if (c == '\'') {
        const bool possessive = (s[j + 1] == 's' || s[j + 1] == 'S') && (j + 2 >= s.size() || !is_word_char(s[j + 2]));
        if (possessive) break;
        ++j;
      } else {
        break;
      }
    }
    std::size_t end = j;
    // Typographic possessive (U+2019 followed by s) is absorbed by the
    // non-ASCII rule above; cut it back off.
    static constexpr std::string_view kCurlyPossessive = "\xE2\x80\x99s";
    if (end - i > kCurlyPossessive.size() && s.substr(end - kCurlyPossessive.size(), kCurlyPossessive.size()) == kCurlyPossessive)
      end -= kCurlyPossessive.size();
    words.push_back(Word{i, end, s.substr(i, end - i)});
    i = j;
  }
  return words;
}

inline bool only_spaces_between(std::string_view s, const Word& a, const Word& b) {
  if (b.begin <= a.end) return false;
  for (std::size_t k = a.end; k < b.begin; ++k) {
    if (s[k] != ' ') return false;
  }
  return true;
}

inline bool is_numeric_word(std::string_view w) {
  if (w.empty() || !text::is_digit(w.front())) return false;
  return std::all_of(w.begin(), w.end(), [](char c) { return text::is_digit(c) || c == '.' || c == ','; });
}

inline bool is_year(std::string_view w) {
  if (w.size() != 4 || !std::all_of(w.begin(), w.end(), text::is_digit)) return false;
  const int v = std::stoi(std::string(w));
  return v >= 1800 && v <= 2099;
}

inline bool is_capitalized(std::string_view w) { return !w.empty() && text::is_upper(w.front()); }

}  // namespace detail

/// Rule-based fallback tagger for raw text. Digit runs are NUMBER (four-digit
/// years are DATE); month and weekday names, with a trailing day and year, are
/// DATE; runs of capitalized words are ORG, LOC, PERSON or MISC by keyword,
/// preceding preposition and run length. Output is sorted and disjoint.
inline std::vector<EntitySpan> tag_entities(std::string_view s) {
  using namespace detail;
  std::vector<EntitySpan> out;
  const auto words = tagger_words(s);
  auto emit = [&](std::size_t b, std::size_t e, EntityType t) {
    out.push_back(EntitySpan{b, e, std::string(s.substr(b, e - b)), t});
  };
  auto adjacent = [&](std::size_t k) { return k + 1 < words.size() && only_spaces_between(s, words[k], words[k + 1]); };

  std::size_t k = 0;
  while (k < words.size()) {
    const Word& w = words[k];
    if (is_numeric_word(w.text)) {
      emit(w.begin, w.end, is_year(w.text) ? EntityType::kDate : EntityType::kNumber);
      ++k;
      continue;
    }
    if (is_month(w.text) || is_weekday(w.text)) {
      std::size_t last = k;
      if (is_month(w.text)) {
        if (adjacent(last) && is_numeric_word(words[last + 1].text) && words[last + 1].text.size() <= 2) ++last;
        // "May 3, 2015" or "May 2015"
        if (last + 1 < words.size() && is_year(words[last + 1].text)) {
          std::string_view gap = s.substr(words[last].end, words[last + 1].begin - words[last].end);
          if (gap == " " || gap == ", ") ++last;
        }
      }
      emit(w.begin, words[last].end, EntityType::kDate);
      k = last + 1;
      continue;
    }

    bool forced_person = false;
    std::size_t first = k;
    if (is_title(w.text)) {
      // "Dr. Smith" or "President Smith"
      if (k + 1 < words.size() && is_capitalized(words[k + 1].text)) {
        std::string_view gap = s.substr(w.end, words[k + 1].begin - w.end);
        if (gap == " " || gap == ". ") {
          forced_person = true;
          first = k + 1;
        }
      }
      if (!forced_person) {
        ++k;
        continue;
      }
    } else if (!is_capitalized(w.text) || is_capital_stopword(w.text)) {
      ++k;
      continue;
    }

    auto run_word_ok = [&](std::string_view t) {
      return is_capitalized(t) && !is_month(t) && !is_weekday(t) && !is_numeric_word(t);
    };
    if (!run_word_ok(words[first].text)) {
      k = first + (first == k ? 1 : 0);
      continue;
    }
    std::size_t last = first;
    while (true) {
      if (adjacent(last) && run_word_ok(words[last + 1].text) && !is_capital_stopword(words[last + 1].text)) {
        ++last;
      } else if (adjacent(last) && is_connector(words[last + 1].text) && adjacent(last + 1) &&
                 run_word_ok(words[last + 2].text)) {
        last += 2;
      } else {
        break;
      }
    }

    EntityType t;
    bool has_org = false;
    bool has_loc = false;
    for (std::size_t q = first; q <= last; ++q) {
      has_org = has_org || is_org_word(words[q].text);
      has_loc = has_loc || is_loc_word(words[q].text);
    }
    const bool after_preposition =
        first > 0 && only_spaces_between(s, words[first - 1], words[first]) &&
        is_locative_preposition(words[first - 1].text);
    if (forced_person) {
      t = EntityType::kPerson;
    } else if (has_org) {
      t = EntityType::kOrg;
    } else if (has_loc || after_preposition) {
      t = EntityType::kLoc;
    } else if (last > first) {
      t = EntityType::kPerson;
    } else {
      t = EntityType::kMisc;
    }
    emit(words[first].begin, words[last].end, t);
    k = last + 1;
  }
  return out;
}

/// Splits on '.', '!' or '?' (plus closing quotes/brackets) followed by
/// whitespace and an uppercase letter, digit or opening quote. Periods that
/// end a known abbreviation never split. Ranges are trimmed of whitespace.
inline std::vector<SentenceRange> segment_sentences(std::string_view s) {
  std::vector<SentenceRange> out;
  auto is_closer = [](char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; };
  auto push_trimmed = [&](std::size_t b, std::size_t e) {
    while (b < e && text::is_space(s[b])) ++b;
    while (e > b && text::is_space(s[e - 1])) --e;
    if (b < e) out.push_back(SentenceRange{b, e});
  };
  std::size_t start = 0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (c != '.' && c != '!' && c != '?') continue;
    std::size_t end = i + 1;
    while (end < s.size() && (s[end] == '.' || s[end] == '!' || s[end] == '?')) ++end;
    while (end < s.size() && is_closer(s[end])) ++end;
    std::size_t next = end;
    while (next < s.size() && text::is_space(s[next])) ++next;
    if (next == end || next >= s.size()) {
      i = end - 1;
      continue;
    }
    const char n = s[next];
    if (!(text::is_upper(n) || text::is_digit(n) || n == '"' || n == '\'')) {
      i = end - 1;
      continue;
    }
    if (c == '.') {
      std::size_t wb = i;
      while (wb > start && (text::is_word_char(s[wb - 1]) || s[wb - 1] == '.')) --wb;
      if (detail::is_abbreviation(s.substr(wb, i - wb))) {
        i = end - 1;
        continue;
      }
    }
    push_trimmed(start, end);
    start = next;
    i = next - 1;
  }
  push_trimmed(start, s.size());
  return out;
}

/// Builds an AnnotatedText from text plus (start, end, type) triples,
/// filling surfaces and validating.
inline AnnotatedText make_annotated(std::string text, std::vector<SentenceRange> sentences,
                                    const std::vector<std::tuple<std::size_t, std::size_t, EntityType>>& spans) {
  AnnotatedText doc{std::move(text), std::move(sentences), {}};
  for (const auto& [b, e, t] : spans) {
    if (b > e || e > doc.text.size()) throw InvalidAnnotation("entity span out of bounds");
    doc.entities.push_back(EntitySpan{b, e, std::string(doc.slice(b, e)), t});
  }
  validate(doc);
  return doc;
}

/// Segments and tags raw text. Tagged spans that straddle a sentence
/// boundary are dropped.
inline AnnotatedText annotate(std::string text) {
  AnnotatedText doc;
  doc.sentences = segment_sentences(text);
  for (auto& e : tag_entities(text)) {
    const bool inside = std::any_of(doc.sentences.begin(), doc.sentences.end(), [&](const SentenceRange& r) {
      return r.start <= e.start && e.end <= r.end;
    });
    if (inside) doc.entities.push_back(std::move(e));
  }
  doc.text = std::move(text);
  return doc;
}

inline EntityPool build_entity_pool(const std::vector<const AnnotatedText*>& corpus) {
  if (corpus.empty()) throw EmptyCorpus();
  EntityPool pool;
  for (const AnnotatedText* doc : corpus) {
    for (const auto& e : doc->entities) pool[e.etype].insert(e.surface);
  }
  return pool;
}

inline EntityPool build_entity_pool(const std::vector<AnnotatedText>& corpus) {
  std::vector<const AnnotatedText*> ptrs;
  for (const auto& d : corpus) ptrs.push_back(&d);
  return build_entity_pool(ptrs);
}

/// Replaces entity `index` with `replacement`, shifting every later offset.
inline AnnotatedText replace_entity(const AnnotatedText& doc, std::size_t index, std::string_view replacement) {
  const EntitySpan& target = doc.entities.at(index);
  const auto delta = static_cast<std::ptrdiff_t>(replacement.size()) -
                     static_cast<std::ptrdiff_t>(target.end - target.start);
  auto shift = [delta](std::size_t v) { return static_cast<std::size_t>(static_cast<std::ptrdiff_t>(v) + delta); };

  AnnotatedText out;
  out.text.reserve(doc.text.size() + replacement.size());
  out.text.append(doc.text, 0, target.start);
  out.text.append(replacement);
  out.text.append(doc.text, target.end, std::string::npos);

  out.sentences = doc.sentences;
  for (auto& s : out.sentences) {
    if (s.start >= target.end) s.start = shift(s.start);
    if (s.end >= target.end) s.end = shift(s.end);
  }
  out.entities = doc.entities;
  for (std::size_t i = 0; i < out.entities.size(); ++i) {
    auto& e = out.entities[i];
    if (i == index) {
      e.end = e.start + replacement.size();
      e.surface = std::string(replacement);
    } else if (e.start >= target.end) {
      e.start = shift(e.start);
      e.end = shift(e.end);
    }
  }
  return out;
}

/// Swaps one uniformly chosen corruptible entity for a uniformly chosen
/// different surface of the same type. Throws NoCorruptibleEntity when no
/// entity has a distinct same-type surface in the pool.
inline std::pair<AnnotatedText, CorruptionRecord> corrupt_summary(const AnnotatedText& summary,
                                                                  const EntityPool& pool, Rng& rng) {
  auto alternatives = [&](const EntitySpan& e) {
    std::vector<std::string_view> alts;
    auto it = pool.find(e.etype);
    if (it == pool.end()) return alts;
    for (const auto& s : it->second) {
      if (s != e.surface) alts.push_back(s);
    }
    return alts;
  };
  std::vector<std::size_t> candidates;
  for (std::size_t i = 0; i < summary.entities.size(); ++i) {
    if (!alternatives(summary.entities[i]).empty()) candidates.push_back(i);
  }
  if (candidates.empty()) throw NoCorruptibleEntity();

  const std::size_t index = candidates[rng.uniform_index(candidates.size())];
  const EntitySpan& original = summary.entities[index];
  const auto alts = alternatives(original);
  const std::string replacement(alts[rng.uniform_index(alts.size())]);

  CorruptionRecord record{index, original.surface, replacement, original.etype};
  return {replace_entity(summary, index, replacement), std::move(record)};
}

struct DatasetStats {
  std::size_t documents = 0;
  std::size_t corrupted = 0;
  std::size_t skipped = 0;  // drawn for corruption but had no corruptible entity
  std::vector<std::string> skipped_ids;

  double realized_ratio() const {
    return documents == 0 ? 0.0 : static_cast<double>(corrupted) / static_cast<double>(documents);
  }
};

struct Dataset {
  std::vector<Triple> triples;
  DatasetStats stats;
};

/// Corrupts each reference summary independently with probability
/// `corruption_ratio`; the replacement pool spans every article and summary.
inline Dataset build_dataset(const std::vector<Document>& docs, double corruption_ratio, Rng& rng) {
  if (docs.empty()) throw EmptyCorpus();
  if (!(corruption_ratio >= 0.0 && corruption_ratio <= 1.0))
    throw std::invalid_argument("corruption ratio must lie in [0, 1]");

  std::vector<const AnnotatedText*> texts;
  for (const auto& d : docs) {
    texts.push_back(&d.article);
    texts.push_back(&d.summary);
  }
  const EntityPool pool = build_entity_pool(texts);

  Dataset out;
  out.stats.documents = docs.size();
  for (const auto& d : docs) {
    Triple t{d.id, d.summary, d.article, d.summary, std::nullopt};
    if (rng.bernoulli(corruption_ratio)) {
      try {
        auto [corrupted, record] = corrupt_summary(d.summary, pool, rng);
        t.input_summary = std::move(corrupted);
        t.corruption = std::move(record);
        ++out.stats.corrupted;
      } catch (const NoCorruptibleEntity&) {
        ++out.stats.skipped;
        out.stats.skipped_ids.push_back(d.id);
      }
    }
    out.triples.push_back(std::move(t));
  }
  return out;
}

}  // namespace entfix
