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

// Seeded generator of short annotated news-style documents. Articles are
// filled from sentence templates with a per-document cast of entities; the
// summary copies the lead sentence and, optionally, some later sentences.

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "entfix/corpus.hpp"
#include "entfix/rng.hpp"

namespace entfix::synth {

struct GeneratorOptions {
  std::size_t min_body_sentences = 7;
  std::size_t max_body_sentences = 10;
  std::size_t first_names = 40;  // how much of each lexicon to draw from
  std::size_t last_names = 40;
  std::size_t orgs = 30;
  std::size_t places = 30;
  std::size_t max_number = 400;
  std::size_t min_summary_extra = 0;  // body sentences copied into the summary
  std::size_t max_summary_extra = 0;  // after the lead sentence
  std::string id_prefix = "doc";

  void validate() const {
    if (min_body_sentences > max_body_sentences) throw std::invalid_argument("min_body_sentences exceeds max_body_sentences");
    if (min_summary_extra > max_summary_extra) throw std::invalid_argument("min_summary_extra exceeds max_summary_extra");
    if (first_names < 1 || last_names < 1 || first_names * last_names < 3)
      throw std::invalid_argument("name lexicon limits allow fewer than 3 distinct people");
    if (orgs < 2 || places < 2) throw std::invalid_argument("orgs and places need at least 2 surfaces each");
  }
};

namespace detail {

inline constexpr std::array<std::string_view, 40> kFirstNames = {
    "Valerie", "Philippe", "Mara",    "Tobias",  "Ingrid",  "Rafael", "Helena", "Omar",    "Priya",   "Declan",
    "Sofia",   "Marcus",   "Leena",   "Anton",   "Carys",   "Dmitri", "Esther", "Felix",   "Greta",   "Hugo",
    "Isla",    "Jonah",    "Katya",   "Lionel",  "Maren",   "Nikolai", "Odette", "Pavel",  "Quinn",   "Rosalind",
    "Silas",   "Tamsin",   "Ulrich",  "Vera",    "Wendell", "Yara",   "Zane",   "Beatrix", "Cormac",  "Delphine"};

inline constexpr std::array<std::string_view, 40> kLastNames = {
    "Braham",   "Okafor",    "Lindqvist", "Marchetti", "Haddad",   "Novak",    "Castellanos", "Whitlock",
    "Adeyemi",  "Rasmussen", "Petrov",    "Ferreira",  "Kowalski", "Ashdown",  "Brennan",     "Duval",
    "Esposito", "Fairbanks", "Gallagher", "Holloway",  "Ibsen",    "Jovanovic", "Kimura",     "Larkspur",
    "Moreau",   "Nakamura",  "Oyelaran",  "Prescott",  "Quintero", "Rourke",   "Sorensen",    "Thackeray",
    "Umarov",   "Valdez",    "Winslow",   "Yilmaz",    "Zielinski", "Abernathy", "Blackwood", "Calloway"};

inline constexpr std::array<std::string_view, 30> kOrgs = {
    "Harbor Council",          "Northfield Rail Company",  "Meridian Bank",           "Caldwell University",
    "Eastbrook Hospital",      "Ashford Transit Authority", "Crestline Water Board",  "Dunmore Orchestra",
    "Kestrel Airlines",        "Larchmont Museum",         "Pinecrest Society",       "Redfern Motors",
    "Saltmarsh Trust",         "Tidewater Press",          "Vantage Insurance Group", "Westgate College",
    "Brightwell Foundation",   "Coral Reef Institute",     "Granite Federation",      "Highmoor Football Club",
    "Ironbridge Union",        "Juniper Health Service",   "Kingsmere Court",         "Lowland Farmers Association",
    "Marigold Network",        "Oakridge Police Department", "Palisade News",         "Riverside Fire Service",
    "Silverline Agency",       "Thornfield School"};

inline constexpr std::array<std::string_view, 30> kPlaces = {
    "Castleford", "Port Ellis",  "Marlow Bay", "Kessington", "Averly",      "Dunhollow",    "Fenwick",  "Glenrook",
    "Harwell",    "Ivybridge",   "Juniper Falls", "Kilmory", "Lowbridge",   "Millbrook",    "Northam",  "Oakhaven",
    "Pellston",   "Redcliffe",   "Stonehaven", "Thornbury",  "Upton Vale",  "Westmere",     "Yarrow Point", "Ashby",
    "Brackwell",  "Coldharbour", "Drayton",    "Eastwick",   "Fairhaven",   "Greystone"};

inline constexpr std::array<std::string_view, 12> kMonths = {"January", "February", "March",     "April",
                                                               "May",     "June",     "July",      "August",
                                                               "September", "October", "November", "December"};

inline constexpr std::array<std::string_view, 7> kWeekdays = {"Monday", "Tuesday",  "Wednesday", "Thursday",
                                                                "Friday", "Saturday", "Sunday"};

// Slots: {P0} {P1} {P2} people, {O0} {O1} organizations, {L0} {L1} places,
// {D0} {D1} dates, {N} a fresh number.
inline constexpr std::array<std::string_view, 6> kLeads = {
    "{P0} was one of {N} people hurt when a bus overturned in {L0} on {D0}.",
    "{O0} said on {D0} that {N} jobs would be cut at its site in {L0}.",
    "{P0} has been named head of {O0} after {N} years with the organization.",
    "A fire in {L0} on {D0} forced {N} families from their homes, according to {P0}.",
    "{P0} won the race in {L0} on {D0}, finishing {N} seconds ahead of {P1}.",
    "{P0} was arrested in {L0} on {D0} after {N} stolen paintings were found.",
};

inline constexpr std::array<std::string_view, 22> kBody = {
    "{P1}, a spokesperson for {O0}, said the inquiry would take {N} weeks.",
    "Crews from {L1} arrived within {N} minutes.",
    "{P0} told reporters the damage in {L0} was worse than expected.",
    "{O1} has pledged {N} million to the recovery effort.",
    "The last similar event in {L1} was recorded {N} years ago.",
    "{P2} said the family had lived in {L0} for {N} years.",
    "{P1} met officials from {O1} on {D1} to discuss the plan.",
    "Local schools remained closed as a precaution.",
    "Roads around the town center were reopened by the evening.",
    "{O0} will publish a full report on {D1}.",
    "{P2}, who works for {O1}, described the response as swift.",
    "More than {N} volunteers joined the search near {L0}.",
    "{P0} thanked the staff at {O0} for their work.",
    "Officials said {N} people were still missing.",
    "The event drew {N} visitors from {L1} and beyond.",
    "{P1} is expected to give evidence on {D1}.",
    "Prices in {L0} rose by {N} percent last year, according to {O1}.",
    "Forecasters expect calmer conditions later in the week.",
    "{P2} arrived in {L1} with {N} colleagues to help.",
    "A second meeting is planned for {D1} in {L1}.",
    "Neighbours described {P0} as quiet and hardworking.",
    "{O1} confirmed that {N} staff had been sent to {L0}.",
};

struct Cast {
  std::array<std::string, 3> people;
  std::array<std::string, 2> orgs;
  std::array<std::string, 2> places;
  std::array<std::string, 2> dates;
};

template <std::size_t N>
std::string_view pick(const std::array<std::string_view, N>& list, Rng& rng, std::size_t limit = N) {
  return list[rng.uniform_index(std::clamp<std::size_t>(limit, 1, N))];
}

inline std::string random_date(Rng& rng) {
  if (rng.bernoulli(0.4)) return std::string(pick(kWeekdays, rng));
  return std::string(pick(kMonths, rng)) + " " + std::to_string(1 + rng.uniform_index(28));
}

/// Distinct draws for each role so one article never reuses a surface in
/// two slots of the same type.
inline Cast random_cast(Rng& rng, const GeneratorOptions& opt) {
  Cast c;
  auto distinct = [&](auto& slots, auto&& draw) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      std::string v;
      do {
        v = draw();
      } while (std::find(slots.begin(), slots.begin() + static_cast<std::ptrdiff_t>(i), v) !=
               slots.begin() + static_cast<std::ptrdiff_t>(i));
      slots[i] = std::move(v);
    }
  };
  distinct(c.people, [&] {
    return std::string(pick(kFirstNames, rng, opt.first_names)) + " " + std::string(pick(kLastNames, rng, opt.last_names));
  });
  distinct(c.orgs, [&] { return std::string(pick(kOrgs, rng, opt.orgs)); });
  distinct(c.places, [&] { return std::string(pick(kPlaces, rng, opt.places)); });
  distinct(c.dates, [&] { return random_date(rng); });
  return c;
}

struct FilledSentence {
  std::string text;
  std::vector<std::tuple<std::size_t, std::size_t, EntityType>> spans;  // relative to text
};

inline FilledSentence fill(std::string_view tmpl, const Cast& cast, Rng& rng, std::size_t max_number) {
  FilledSentence out;
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] != '{') {
      out.text.push_back(tmpl[i++]);
      continue;
    }
    const std::size_t close = tmpl.find('}', i);
    const std::string_view slot = tmpl.substr(i + 1, close - i - 1);
    std::string value;
    EntityType t = EntityType::kMisc;
    const std::size_t idx = slot.size() > 1 ? static_cast<std::size_t>(slot[1] - '0') : 0;
    switch (slot[0]) {
      case 'P': value = cast.people[idx]; t = EntityType::kPerson; break;
      case 'O': value = cast.orgs[idx]; t = EntityType::kOrg; break;
      case 'L': value = cast.places[idx]; t = EntityType::kLoc; break;
      case 'D': value = cast.dates[idx]; t = EntityType::kDate; break;
      default: value = std::to_string(2 + rng.uniform_index(std::max<std::size_t>(max_number, 3) - 1)); t = EntityType::kNumber; break;
    }
    out.spans.emplace_back(out.text.size(), out.text.size() + value.size(), t);
    out.text += value;
    i = close + 1;
  }
  return out;
}

inline AnnotatedText join(const std::vector<FilledSentence>& sentences) {
  std::string text;
  std::vector<SentenceRange> ranges;
  std::vector<std::tuple<std::size_t, std::size_t, EntityType>> spans;
  for (const auto& s : sentences) {
    if (!text.empty()) text.push_back(' ');
    const std::size_t base = text.size();
    text += s.text;
    ranges.push_back(SentenceRange{base, text.size()});
    for (const auto& [b, e, t] : s.spans) spans.emplace_back(base + b, base + e, t);
  }
  return make_annotated(std::move(text), std::move(ranges), spans);
}

}  // namespace detail


/// One document. The summary is the lead sentence plus a random number of
/// entity-bearing body sentences, in article order.
inline Document generate_document(Rng& rng, const std::string& id, const GeneratorOptions& opt = {}) {
  using namespace detail;
  opt.validate();
  const Cast cast = random_cast(rng, opt);
  std::vector<FilledSentence> article;
  article.push_back(fill(pick(kLeads, rng), cast, rng, opt.max_number));

  std::vector<std::size_t> body(kBody.size());
  for (std::size_t i = 0; i < body.size(); ++i) body[i] = i;
  rng.shuffle(body);
  const std::size_t span = opt.max_body_sentences - opt.min_body_sentences + 1;
  body.resize(std::min(body.size(), opt.min_body_sentences + rng.uniform_index(span)));
  for (std::size_t b : body) article.push_back(fill(kBody[b], cast, rng, opt.max_number));

  std::vector<std::size_t> with_entities;
  for (std::size_t i = 1; i < article.size(); ++i) {
    if (!article[i].spans.empty()) with_entities.push_back(i);
  }
  rng.shuffle(with_entities);
  const std::size_t extra = opt.min_summary_extra + rng.uniform_index(opt.max_summary_extra - opt.min_summary_extra + 1);
  with_entities.resize(std::min(with_entities.size(), extra));
  std::sort(with_entities.begin(), with_entities.end());
  std::vector<FilledSentence> summary{article.front()};
  for (std::size_t i : with_entities) summary.push_back(article[i]);

  return Document{id, join(article), join(summary)};
}

/// `count` documents with ids "<prefix>-00000", "<prefix>-00001", ...
inline std::vector<Document> generate_corpus(std::size_t count, std::uint64_t seed, const GeneratorOptions& opt = {}) {
  Rng rng(seed);
  std::vector<Document> docs;
  docs.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string n = std::to_string(i);
    docs.push_back(generate_document(rng, opt.id_prefix + "-" + std::string(5 - std::min<std::size_t>(5, n.size()), '0') + n, opt));
  }
  return docs;
}

}  // namespace entfix::synth
