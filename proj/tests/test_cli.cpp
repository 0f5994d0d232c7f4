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
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "support.hpp"

namespace entfix {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::fixture;

const char* const kToyFlags = "--d-model 32 --layers 1 --heads 2 --d-ff 64 --max-len 256";

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<json> read_rows(const fs::path& p) {
  std::vector<json> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    if (!line.empty()) rows.push_back(json::parse(line));
  }
  return rows;
}

void write_rows(const fs::path& p, const std::vector<json>& rows) {
  std::ofstream out(p);
  for (const auto& r : rows) out << r.dump() << '\n';
}

json strip_fingerprint(json j) {
  if (j.is_object()) j.erase("fingerprint");
  return j;
}

fs::path make_dir(const std::string& tag) {
  const fs::path dir = fs::temp_directory_path() / ("entfix-cli-" + std::to_string(::getpid()) + "-" + tag);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

CliRun run_in(const fs::path& dir, const std::string& args) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(ENTFIX_CLI) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  CliRun r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override { dir_ = make_dir(::testing::UnitTest::GetInstance()->current_test_info()->name()); }
  void TearDown() override { fs::remove_all(dir_); }

  CliRun run(const std::string& args) const { return run_in(dir_, args); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

// A checkpoint memorizing the memorize8 fixture, trained once through the CLI.
const fs::path& memorized_checkpoint() {
  static const fs::path ckpt = [] {
    const fs::path dir = make_dir("shared");
    std::atexit([] { fs::remove_all(fs::temp_directory_path() / ("entfix-cli-" + std::to_string(::getpid()) + "-shared")); });
    const fs::path out = dir / "mem.ckpt";
    const CliRun r = run_in(dir, "train --triples " + fixture("memorize8.jsonl") + " --out " + out.string() +
                                  " --epochs 200 --seed 5 " + kToyFlags);
    EXPECT_EQ(r.code, 0) << r.err;
    return out;
  }();
  return ckpt;
}

bool is_fingerprint(const json& j) {
  return j.is_string() && std::regex_match(j.get<std::string>(), std::regex("[0-9a-f]{16}"));
}

TEST_F(Cli, HelpExitsZeroAndUsageErrorsExitTwo) {
  EXPECT_EQ(run("--help").code, 0);
  EXPECT_EQ(run("train --help").code, 0);
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("retrieve --input x.jsonl").code, 2);
  EXPECT_EQ(run("gen-corpus --out " + path("d.jsonl") + " --count nope").code, 2);
}

TEST_F(Cli, MissingInputIsAnIoErrorNamingThePath) {
  const CliRun r = run("train --triples " + path("absent.jsonl") + " --out " + path("m.ckpt"));
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("absent.jsonl"), std::string::npos) << r.err;
}

TEST_F(Cli, GenCorpusIsDeterministic) {
  ASSERT_EQ(run("gen-corpus --count 12 --seed 4 --out " + path("a.jsonl")).code, 0);
  ASSERT_EQ(run("gen-corpus --count 12 --seed 4 --out " + path("b.jsonl")).code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));
  const auto rows = read_rows(path("a.jsonl"));
  ASSERT_EQ(rows.size(), 12u);
  for (const auto& r : rows) EXPECT_EQ(document_from_json(r).summary.sentences.size(), 1u);
}

TEST_F(Cli, BuildCorpusMatchesLibraryAndIsByteStable) {
  const std::string in = fixture("pool_docs.jsonl");
  ASSERT_EQ(run("build-corpus --input " + in + " --out " + path("a.jsonl") + " --ratio 1 --seed 42").code, 0);
  ASSERT_EQ(run("build-corpus --input " + in + " --out " + path("b.jsonl") + " --ratio 1 --seed 42").code, 0);
  EXPECT_EQ(slurp(path("a.jsonl")), slurp(path("b.jsonl")));

  std::vector<Document> docs;
  for (const auto& j : read_rows(in)) docs.push_back(document_from_json(j));
  Rng rng(42);
  const Dataset want = build_dataset(docs, 1.0, rng);
  const auto rows = read_rows(path("a.jsonl"));
  ASSERT_EQ(rows.size(), want.triples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(strip_fingerprint(rows[i]), to_json(want.triples[i])) << i;
  }
  const json stats = json::parse(slurp(path("a.jsonl.stats.json")));
  EXPECT_EQ(stats.at("corrupted_count"), want.stats.corrupted);
  EXPECT_TRUE(is_fingerprint(stats.at("fingerprint")));
}

TEST_F(Cli, BuildCorpusSeed42Golden) {
  ASSERT_EQ(run("build-corpus --input " + fixture("pool_docs.jsonl") + " --out " + path("t.jsonl") +
                " --ratio 1 --seed 42")
                .code,
            0);
  const auto got = read_rows(path("t.jsonl"));
  const auto want = read_rows(fixture("pool_seed42_triples.jsonl"));
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < got.size(); ++i) EXPECT_EQ(strip_fingerprint(got[i]), want[i]) << i;
}

TEST_F(Cli, BuildCorpusRatioZeroCorruptsNothing) {
  ASSERT_EQ(run("build-corpus --input " + fixture("pool_docs.jsonl") + " --out " + path("t.jsonl") + " --ratio 0")
                .code,
            0);
  const json stats = json::parse(slurp(path("t.jsonl.stats.json")));
  EXPECT_EQ(stats.at("documents"), 3);
  EXPECT_EQ(stats.at("corrupted_count"), 0);
  EXPECT_EQ(stats.at("realized_ratio"), 0.0);
  for (const auto& r : read_rows(path("t.jsonl"))) {
    EXPECT_TRUE(r.at("corruption").is_null());
    EXPECT_EQ(r.at("input_summary"), r.at("target_summary"));
  }
}

TEST_F(Cli, FlagsOverrideConfigFile) {
  std::ofstream(path("cfg.json")) << R"({"corpus": {"ratio": 1.0, "seed": 42}})";
  ASSERT_EQ(run("build-corpus --config " + path("cfg.json") + " --input " + fixture("pool_docs.jsonl") + " --out " +
                path("t.jsonl") + " --ratio 0")
                .code,
            0);
  const json stats = json::parse(slurp(path("t.jsonl.stats.json")));
  EXPECT_EQ(stats.at("corrupted_count"), 0);
  EXPECT_EQ(stats.at("config").at("settings").at("corpus").at("ratio"), 0.0);
  EXPECT_EQ(stats.at("config").at("settings").at("corpus").at("seed"), 42);
  EXPECT_EQ(stats.at("config").at("command"), "build-corpus");
}

TEST_F(Cli, FingerprintTracksConfiguration) {
  const std::string base = "build-corpus --input " + fixture("pool_docs.jsonl") + " --seed 42 ";
  ASSERT_EQ(run(base + "--ratio 0.5 --out " + path("a.jsonl")).code, 0);
  ASSERT_EQ(run(base + "--ratio 0.5 --out " + path("b.jsonl")).code, 0);
  ASSERT_EQ(run(base + "--ratio 0.6 --out " + path("c.jsonl")).code, 0);
  const auto fp = [&](const std::string& n) { return json::parse(slurp(path(n + ".jsonl.stats.json"))).at("fingerprint"); };
  EXPECT_EQ(fp("a"), fp("b"));
  EXPECT_NE(fp("a"), fp("c"));
}

TEST_F(Cli, TrainWithZeroLearningRateWritesInitialModel) {
  const CliRun r = run("train --triples " + fixture("smoke50.jsonl") + " --out " + path("m.ckpt") +
                    " --epochs 1 --lr 0 --seed 9 " + kToyFlags);
  ASSERT_EQ(r.code, 0) << r.err;
  const Model got = load_checkpoint(path("m.ckpt"));
  TrainConfig cfg;
  cfg.seed = 9;
  Rng rng(9);
  const Model want = init_model(testing::load_triples("smoke50.jsonl"), testing::toy_config(), cfg, rng);
  EXPECT_TRUE(bit_equal(got.params, want.params));
}

TEST_F(Cli, TrainReportsDecreasingLossAndRunMetadata) {
  const CliRun r = run("train --triples " + fixture("smoke50.jsonl") + " --validation " + fixture("memorize8.jsonl") +
                    " --out " + path("m.ckpt") + " --epochs 4 --seed 3 " + kToyFlags);
  ASSERT_EQ(r.code, 0) << r.err;
  std::vector<json> epochs;
  std::istringstream lines(r.out);
  for (std::string line; std::getline(lines, line);) epochs.push_back(json::parse(line));
  ASSERT_EQ(epochs.size(), 4u);
  EXPECT_LT(epochs.back().at("train_loss").get<double>(), epochs.front().at("train_loss").get<double>());
  for (const auto& e : epochs) {
    EXPECT_TRUE(is_fingerprint(e.at("fingerprint")));
    EXPECT_TRUE(e.at("validation_loss").is_number());
  }
  json config;
  load_checkpoint(path("m.ckpt"), &config);
  EXPECT_EQ(config.at("run").at("fingerprint"), epochs.front().at("fingerprint"));
  EXPECT_EQ(config.at("run").at("history").size(), 4u);
}

TEST_F(Cli, TrainRejectingEveryExampleExitsOne) {
  const CliRun r = run("train --triples " + fixture("memorize8.jsonl") + " --out " + path("m.ckpt") +
                    " --max-len 16 --d-model 32 --heads 2");
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST_F(Cli, InvalidHyperparameterExitsOne) {
  const CliRun r = run("train --triples " + fixture("smoke50.jsonl") + " --out " + path("m.ckpt") + " --thr-det 1.5");
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST_F(Cli, CorrectRestoresMemorizedTargets) {
  const CliRun r = run("correct --model " + memorized_checkpoint().string() + " --input " + fixture("memorize8.jsonl") +
                    " --out " + path("out.jsonl") + " --trace");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(path("out.jsonl"));
  const auto triples = testing::load_triples("memorize8.jsonl");
  ASSERT_EQ(rows.size(), triples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].at("id"), triples[i].id);
    EXPECT_EQ(rows[i].at("output"), triples[i].target_summary.text) << triples[i].id;
    EXPECT_TRUE(rows[i].contains("trace"));
    EXPECT_TRUE(is_fingerprint(rows[i].at("fingerprint")));
  }
  const json stats = json::parse(slurp(path("out.jsonl.stats.json")));
  EXPECT_EQ(stats.at("n_examples"), 8);
  EXPECT_EQ(stats.at("errors"), 0);
}

TEST_F(Cli, CorrectThresholdOverrideMatchesLibrary) {
  const CliRun r = run("correct --model " + memorized_checkpoint().string() + " --input " + fixture("smoke50.jsonl") +
                    " --out " + path("out.jsonl") + " --thr-det 0.9 --thr-cor 0.3");
  ASSERT_EQ(r.code, 0) << r.err;
  const Model m = load_checkpoint(memorized_checkpoint().string());
  const auto rows = read_rows(path("out.jsonl"));
  const auto triples = testing::load_triples("smoke50.jsonl");
  ASSERT_EQ(rows.size(), triples.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const CorrectionResult want =
        apply_thresholds(score_summary(m, triples[i].input_summary, triples[i].article), Thresholds{0.9, 0.3});
    EXPECT_EQ(rows[i].at("output"), want.output_text);
    EXPECT_EQ(rows[i].at("edits").size(), want.edits.size());
    EXPECT_EQ(rows[i].at("evidence").get<std::vector<std::size_t>>(), want.evidence_sentences);
    if (rows[i].at("edits").empty()) {
      EXPECT_EQ(rows[i].at("output"), triples[i].input_summary.text);
    }
  }
}

TEST_F(Cli, CorrectEmptyInputWritesEmptyOutput) {
  std::ofstream(path("empty.jsonl")).close();
  const CliRun r = run("correct --model " + memorized_checkpoint().string() + " --input " + path("empty.jsonl") +
                    " --out " + path("out.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(slurp(path("out.jsonl")), "");
}

TEST_F(Cli, CorrectReportsBadLinesInline) {
  const auto good = read_rows(fixture("memorize8.jsonl")).front();
  json bad_span = good;
  bad_span["id"] = "bad-span";
  bad_span["input_summary"] = {{"text", "Tom"}, {"entities", {{{"start", 0}, {"end", 99}, {"type", "PERSON"}}}}};
  {
    std::ofstream out(path("in.jsonl"));
    out << good.dump() << '\n' << "{not json\n" << bad_span.dump() << '\n';
  }
  const CliRun r = run("correct --model " + memorized_checkpoint().string() + " --input " + path("in.jsonl") + " --out " +
                    path("out.jsonl"));
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(path("out.jsonl"));
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_FALSE(rows[0].contains("error"));
  EXPECT_TRUE(rows[1].contains("error"));
  EXPECT_EQ(rows[2].at("id"), "bad-span");
  EXPECT_TRUE(rows[2].contains("error"));
  EXPECT_EQ(json::parse(slurp(path("out.jsonl.stats.json"))).at("errors"), 2);
}

TEST_F(Cli, EvalPerfectAndNoOpOutputs) {
  const auto gold = read_rows(fixture("smoke50.jsonl"));
  std::vector<json> perfect, noop;
  std::size_t corrupted = 0;
  for (const auto& g : gold) {
    const Triple t = triple_from_json(g);
    perfect.push_back({{"id", t.id}, {"output", t.target_summary.text}, {"edits", json::array()}});
    noop.push_back({{"id", t.id}, {"output", t.input_summary.text}, {"edits", json::array()}});
    corrupted += t.corruption ? 1 : 0;
  }
  write_rows(path("perfect.jsonl"), perfect);
  write_rows(path("noop.jsonl"), noop);
  ASSERT_EQ(run("eval --results " + path("perfect.jsonl") + " --gold " + fixture("smoke50.jsonl") + " --report " +
                path("p.json"))
                .code,
            0);
  ASSERT_EQ(run("eval --results " + path("noop.jsonl") + " --gold " + fixture("smoke50.jsonl") + " --report " +
                path("n.json"))
                .code,
            0);
  const json p = json::parse(slurp(path("p.json")));
  const json n = json::parse(slurp(path("n.json")));
  EXPECT_EQ(p.at("exact_match_accuracy"), 1.0);
  EXPECT_NEAR(n.at("exact_match_accuracy").get<double>(),
              1.0 - static_cast<double>(corrupted) / static_cast<double>(gold.size()), 1e-12);
  EXPECT_EQ(n.at("buckets").at("inconsistent").at("count"), corrupted);
  EXPECT_TRUE(n.at("buckets").at("inconsistent").at("changed").is_null());
  EXPECT_TRUE(n.at("samples_per_min").is_null());
  EXPECT_TRUE(is_fingerprint(n.at("fingerprint")));
}

TEST_F(Cli, EvalHandCheckedAdjudication) {
  const std::string d = fixture("adjudication/");
  const CliRun r = run("eval --results " + d + "results.jsonl --gold " + d + "gold.jsonl --labels " + d +
                    "labels.jsonl --adjudication " + d + "adjudication.jsonl --report " + path("r.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json got = json::parse(slurp(path("r.json")));
  const json want = testing::read_json(d + "expected_counts.json");
  EXPECT_EQ(got.at("exact_match_accuracy"), want.at("exact_match_accuracy"));
  EXPECT_EQ(got.at("n_examples"), want.at("n_examples"));
  EXPECT_EQ(got.at("buckets"), want.at("buckets"));
}

TEST_F(Cli, EvalLengthMismatchExitsOne) {
  auto rows = read_rows(fixture("adjudication/results.jsonl"));
  rows.pop_back();
  write_rows(path("short.jsonl"), rows);
  const CliRun r = run("eval --results " + path("short.jsonl") + " --gold " + fixture("adjudication/gold.jsonl") +
                    " --report " + path("r.json"));
  EXPECT_EQ(r.code, 1) << r.err;
}

TEST_F(Cli, EvalPicksUpCorrectTiming) {
  ASSERT_EQ(run("correct --model " + memorized_checkpoint().string() + " --input " + fixture("memorize8.jsonl") +
                " --out " + path("out.jsonl"))
                .code,
            0);
  const CliRun r = run("eval --results " + path("out.jsonl") + " --gold " + fixture("memorize8.jsonl") + " --report " +
                    path("r.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json report = json::parse(slurp(path("r.json")));
  EXPECT_EQ(report.at("exact_match_accuracy"), 1.0);
  EXPECT_TRUE(report.at("samples_per_min").is_number());
  EXPECT_EQ(report.at("jobs"), 1);
}

TEST_F(Cli, BenchNeedsThirtyInputs) {
  const CliRun r = run("bench --model " + memorized_checkpoint().string() + " --input " + fixture("memorize8.jsonl") +
                    " --report " + path("b.json"));
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("30"), std::string::npos) << r.err;
}

TEST_F(Cli, BenchComparesBothVariants) {
  ASSERT_EQ(run("gen-corpus --count 40 --seed 8 --out " + path("docs.jsonl")).code, 0);
  const CliRun r = run("bench --model " + memorized_checkpoint().string() + " --input " + path("docs.jsonl") +
                    " --batch-size 8 --repeats 2 --report " + path("b.json"));
  ASSERT_EQ(r.code, 0) << r.err;
  const json b = json::parse(slurp(path("b.json")));
  EXPECT_EQ(b.at("n_inputs"), 40);
  for (const char* v : {"evidence", "full-article"}) {
    EXPECT_EQ(b.at("variants").at(v).at("runs").size(), 2u);
    EXPECT_GT(b.at("variants").at(v).at("samples_per_min").get<double>(), 0.0);
  }
  EXPECT_TRUE(b.at("evidence_faster").get<bool>());
  EXPECT_TRUE(b.contains("machine"));
  EXPECT_TRUE(is_fingerprint(b.at("fingerprint")));
}

TEST_F(Cli, RetrieveMatchesLibrary) {
  const CliRun r = run("retrieve --input " + fixture("pool_docs.jsonl") + " --out " + path("ev.jsonl") + " --k 1");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = read_rows(path("ev.jsonl"));
  const auto docs = read_rows(fixture("pool_docs.jsonl"));
  ASSERT_EQ(rows.size(), docs.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Document d = document_from_json(docs[i]);
    const EvidenceSet ev = select_evidence(d.summary, d.article, 1);
    EXPECT_EQ(rows[i].at("m"), ev.m());
    EXPECT_EQ(rows[i].at("text"), ev.text);
    std::vector<std::size_t> idx;
    for (const auto& s : rows[i].at("sentences")) idx.push_back(s.at("index").get<std::size_t>());
    EXPECT_EQ(idx, ev.article_indices());
  }
}

}  // namespace
}  // namespace entfix
