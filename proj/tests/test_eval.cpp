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

#include <gtest/gtest.h>

#include "support.hpp"

namespace entfix {
namespace {

using nlohmann::json;
using testing::fixture;
using testing::read_json;

TEST(ExactMatch, Examples) {
  EXPECT_DOUBLE_EQ(exact_match_accuracy({"a b", "c"}, {"a b", "c"}), 1.0);
  EXPECT_DOUBLE_EQ(exact_match_accuracy({"a b", "x"}, {"a b", "c"}), 0.5);
  EXPECT_DOUBLE_EQ(exact_match_accuracy({}, {}), 0.0);
}

TEST(ExactMatch, NormalizesWhitespace) {
  EXPECT_DOUBLE_EQ(exact_match_accuracy({"  Tom  met\tAna.\n"}, {"Tom met Ana."}), 1.0);
  EXPECT_DOUBLE_EQ(exact_match_accuracy({"Tom met Ana ."}, {"Tom met Ana."}), 0.0);
}

TEST(ExactMatch, LengthMismatchThrows) {
  EXPECT_THROW(exact_match_accuracy({"a"}, {"a", "b"}), LengthMismatch);
}

TEST(ExactMatch, IdentityOutputsScoreOneMinusRealizedRatio) {
  const auto docs = synth::generate_corpus(120, 61);
  Rng rng(62);
  const Dataset ds = build_dataset(docs, 0.4, rng);
  std::vector<std::string> outputs, gold;
  std::size_t corrupted = 0;
  for (const auto& t : ds.triples) {
    outputs.push_back(t.input_summary.text);
    gold.push_back(t.target_summary.text);
    corrupted += t.corruption ? 1 : 0;
  }
  const double realized = static_cast<double>(corrupted) / static_cast<double>(ds.triples.size());
  EXPECT_NEAR(exact_match_accuracy(outputs, gold), 1.0 - realized, 1e-12);
  EXPECT_DOUBLE_EQ(exact_match_accuracy(gold, gold), 1.0);
}

TEST(Consistency, ParsesBothSpellings) {
  EXPECT_EQ(parse_consistency("consistent"), Consistency::kConsistent);
  EXPECT_EQ(parse_consistency("CORRECT"), Consistency::kConsistent);
  EXPECT_EQ(parse_consistency("inconsistent"), Consistency::kInconsistent);
  EXPECT_EQ(parse_consistency("INCORRECT"), Consistency::kInconsistent);
  EXPECT_THROW(parse_consistency("maybe"), InvalidAnnotation);
}

std::vector<json> read_jsonl(const std::string& path) {
  std::ifstream in(path);
  std::vector<json> rows;
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

std::string adj_file(const std::string& name) { return fixture("adjudication/" + name); }

std::vector<LabelledOutcome> fixture_outcomes() {
  std::map<std::string, Consistency> labels;
  for (const auto& j : read_jsonl(adj_file("labels.jsonl")))
    labels[j.at("id").get<std::string>()] = parse_consistency(j.at("label").get<std::string>());
  std::vector<LabelledOutcome> out;
  for (const auto& r : read_jsonl(adj_file("results.jsonl"))) {
    const std::string id = r.at("id").get<std::string>();
    out.push_back(LabelledOutcome{id, labels.at(id), r.at("edits").size()});
  }
  return out;
}

std::map<std::string, Adjudication> fixture_adjudication() {
  std::map<std::string, Adjudication> out;
  for (const auto& j : read_jsonl(adj_file("adjudication.jsonl"))) {
    out[j.at("id").get<std::string>()] = Adjudication{parse_consistency(j.at("label_before").get<std::string>()),
                                                       parse_consistency(j.at("label_after").get<std::string>())};
  }
  return out;
}

void expect_bucket(const BucketCounts& got, const json& want) {
  EXPECT_EQ(got.count, want.at("count").get<std::size_t>());
  EXPECT_EQ(got.edited, want.at("edited").get<std::size_t>());
  ASSERT_TRUE(got.changed.has_value());
  EXPECT_EQ(*got.changed, want.at("changed").get<std::size_t>());
}

TEST(FactccCounts, HandCheckedGolden) {
  const json want = read_json(adj_file("expected_counts.json"));
  const auto adjudication = fixture_adjudication();
  const FactccCounts counts = factcc_counts(fixture_outcomes(), &adjudication);
  expect_bucket(counts.consistent, want.at("buckets").at("consistent"));
  expect_bucket(counts.inconsistent, want.at("buckets").at("inconsistent"));
}

TEST(FactccCounts, HandCheckedAccuracy) {
  const json want = read_json(adj_file("expected_counts.json"));
  std::vector<std::string> outputs, gold;
  for (const auto& r : read_jsonl(adj_file("results.jsonl"))) outputs.push_back(r.at("output").get<std::string>());
  for (const auto& g : read_jsonl(adj_file("gold.jsonl"))) gold.push_back(triple_from_json(g).target_summary.text);
  EXPECT_DOUBLE_EQ(exact_match_accuracy(outputs, gold), want.at("exact_match_accuracy").get<double>());
}

TEST(FactccCounts, MissingAdjudicationLeavesChangedEmpty) {
  const auto outcomes = fixture_outcomes();
  const FactccCounts none = factcc_counts(outcomes, nullptr);
  EXPECT_FALSE(none.consistent.changed.has_value());
  EXPECT_FALSE(none.inconsistent.changed.has_value());
  EXPECT_EQ(none.inconsistent.edited, 4u);

  auto partial = fixture_adjudication();
  partial.erase("e09");
  const FactccCounts some = factcc_counts(outcomes, &partial);
  EXPECT_FALSE(some.consistent.changed.has_value());
  ASSERT_TRUE(some.inconsistent.changed.has_value());
  EXPECT_EQ(*some.inconsistent.changed, 3u);
}

TEST(FactccCounts, UneditedFlipIsNotCounted) {
  const std::vector<LabelledOutcome> outcomes = {{"a", Consistency::kInconsistent, 0}};
  const std::map<std::string, Adjudication> adj = {{"a", {Consistency::kInconsistent, Consistency::kConsistent}}};
  const FactccCounts c = factcc_counts(outcomes, &adj);
  EXPECT_EQ(c.inconsistent.count, 1u);
  EXPECT_EQ(c.inconsistent.edited, 0u);
  EXPECT_EQ(c.inconsistent.changed, std::optional<std::size_t>(0));
}

Model small_model() {
  const auto triples = testing::load_triples("smoke50.jsonl");
  Rng rng(1);
  return init_model(triples, testing::toy_config(), TrainConfig{}, rng);
}

TEST(Throughput, RequiresThirtyInputs) {
  const Model m = small_model();
  EXPECT_THROW(measure_throughput(m, synth::generate_corpus(29, 3), ThroughputOptions{}), std::invalid_argument);
  EXPECT_NO_THROW(measure_throughput(m, synth::generate_corpus(30, 3), ThroughputOptions{}));
}

TEST(Throughput, ReportsConsistentFields) {
  const Model m = small_model();
  const auto docs = synth::generate_corpus(40, 5);
  ThroughputOptions opt;
  opt.batch_size = 8;
  const ThroughputResult r = measure_throughput(m, docs, opt);
  EXPECT_EQ(r.warmup, 8u);
  EXPECT_EQ(r.measured, 32u);
  EXPECT_GT(r.seconds, 0.0);
  EXPECT_NEAR(r.samples_per_min, 60.0 * 32.0 / r.seconds, 1e-9 * r.samples_per_min);
  EXPECT_GT(r.total_tokens, 0u);

  opt.jobs = 2;
  const ThroughputResult parallel = measure_throughput(m, docs, opt);
  EXPECT_EQ(parallel.total_tokens, r.total_tokens);
}

TEST(Throughput, RateStableWhenInputDoubles) {
  const Model m = small_model();
  const auto docs = synth::generate_corpus(60, 7);
  auto doubled = docs;
  doubled.insert(doubled.end(), docs.begin(), docs.end());
  const double one = measure_throughput(m, docs, ThroughputOptions{}).samples_per_min;
  const double two = measure_throughput(m, doubled, ThroughputOptions{}).samples_per_min;
  EXPECT_GT(two / one, 0.5);
  EXPECT_LT(two / one, 2.0);
}

}  // namespace
}  // namespace entfix
