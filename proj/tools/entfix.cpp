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

// entfix: build corrupted-summary corpora, train, correct, evaluate and
// benchmark from the command line.
//
// Exit codes: 0 success, 1 domain error, 2 usage or I/O error.

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "entfix/entfix.hpp"

namespace {

using nlohmann::json;
using namespace entfix;

constexpr int kExitDomain = 1;
constexpr int kExitUsage = 2;

/// Every tunable setting. A JSON config file mirrors these field names;
/// command-line flags override file values.
struct RunConfig {
  EncoderConfig encoder;
  TrainConfig train;
  double ratio = 0.5;
  std::uint64_t corpus_seed = 42;
  std::size_t gen_count = 500;
  std::uint64_t gen_seed = 1;
  std::string variant = "evidence";
  std::optional<double> thr_det;  // inference overrides of the checkpoint thresholds
  std::optional<double> thr_cor;
  std::size_t bench_batch_size = 32;
  std::size_t bench_repeats = 2;
  std::size_t bench_passes = 1;
  std::size_t jobs = 1;
};

json to_json(const RunConfig& c) {
  json enc = to_json(c.encoder);
  enc.erase("vocab_size");
  const TrainConfig& t = c.train;
  json inference = {{"variant", c.variant}};
  inference["thr_det"] = c.thr_det ? json(*c.thr_det) : json(nullptr);
  inference["thr_cor"] = c.thr_cor ? json(*c.thr_cor) : json(nullptr);
  return {{"encoder", enc},
          {"train",
           {{"epochs", t.epochs},
            {"learning_rate", t.learning_rate},
            {"batch_size", t.batch_size},
            {"beta1", t.beta1},
            {"beta2", t.beta2},
            {"adam_epsilon", t.adam_epsilon},
            {"seed", t.seed},
            {"thr_det", t.thr_det},
            {"thr_cor", t.thr_cor},
            {"evidence_k", t.evidence_k},
            {"min_count", t.min_count},
            {"mask_correction_rows", t.mask_correction_rows}}},
          {"corpus", {{"ratio", c.ratio}, {"seed", c.corpus_seed}}},
          {"generate", {{"count", c.gen_count}, {"seed", c.gen_seed}}},
          {"inference", inference},
          {"bench", {{"batch_size", c.bench_batch_size}, {"repeats", c.bench_repeats}, {"passes", c.bench_passes}}},
          {"jobs", c.jobs}};
}

void update_from_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw std::runtime_error("config file must hold a JSON object");
  if (j.contains("encoder")) update_from_json(c.encoder, j.at("encoder"));
  if (j.contains("train")) {
    const json& t = j.at("train");
    TrainConfig& r = c.train;
    r.epochs = t.value("epochs", r.epochs);
    r.learning_rate = t.value("learning_rate", r.learning_rate);
    r.batch_size = t.value("batch_size", r.batch_size);
    r.beta1 = t.value("beta1", r.beta1);
    r.beta2 = t.value("beta2", r.beta2);
    r.adam_epsilon = t.value("adam_epsilon", r.adam_epsilon);
    r.seed = t.value("seed", r.seed);
    r.thr_det = t.value("thr_det", r.thr_det);
    r.thr_cor = t.value("thr_cor", r.thr_cor);
    r.evidence_k = t.value("evidence_k", r.evidence_k);
    r.min_count = t.value("min_count", r.min_count);
    r.mask_correction_rows = t.value("mask_correction_rows", r.mask_correction_rows);
  }
  if (j.contains("corpus")) {
    c.ratio = j.at("corpus").value("ratio", c.ratio);
    c.corpus_seed = j.at("corpus").value("seed", c.corpus_seed);
  }
  if (j.contains("generate")) {
    c.gen_count = j.at("generate").value("count", c.gen_count);
    c.gen_seed = j.at("generate").value("seed", c.gen_seed);
  }
  if (j.contains("inference")) {
    const json& i = j.at("inference");
    c.variant = i.value("variant", c.variant);
    if (i.contains("thr_det") && !i.at("thr_det").is_null()) c.thr_det = i.at("thr_det").get<double>();
    if (i.contains("thr_cor") && !i.at("thr_cor").is_null()) c.thr_cor = i.at("thr_cor").get<double>();
  }
  if (j.contains("bench")) {
    c.bench_batch_size = j.at("bench").value("batch_size", c.bench_batch_size);
    c.bench_repeats = j.at("bench").value("repeats", c.bench_repeats);
    c.bench_passes = j.at("bench").value("passes", c.bench_passes);
  }
  c.jobs = j.value("jobs", c.jobs);
}

/// Flag values; only flags the user actually passed are applied.
struct Overrides {
  std::string config_path;
  std::optional<std::size_t> epochs, batch_size, d_model, n_layers, n_heads, d_ff, max_len, evidence_k, min_count;
  std::optional<double> learning_rate, thr_det, thr_cor, ratio;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs, bench_batch_size, bench_repeats, bench_passes, count;
  std::optional<std::string> variant;
  bool unmasked = false;
  bool no_match_feature = false;
};

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path + ": " + e.what());
  }
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("error while writing " + path);
}

void require_readable(const std::string& path) {
  if (!std::ifstream(path)) throw std::runtime_error("cannot open " + path);
}

/// The materialized configuration for one command and its fingerprint.
struct Materialized {
  json config;
  std::string fingerprint;
};

Materialized materialize(const std::string& command, const RunConfig& c, const json& model_config = nullptr) {
  Materialized m;
  m.config = {{"command", command}, {"settings", to_json(c)}};
  if (!model_config.is_null()) m.config["model"] = model_config;
  m.fingerprint = config_fingerprint(m.config);
  return m;
}

std::string sidecar_path(const std::string& out) { return out + ".stats.json"; }

/// Summary and article of a document or triple record. Triples contribute
/// their input summary.
std::pair<AnnotatedText, AnnotatedText> summary_and_article(const json& j) {
  const json& summary = j.contains("input_summary") ? j.at("input_summary") : j.at("summary");
  return {annotated_from_json(summary), annotated_from_json(j.at("article"))};
}

std::string record_id(const json& j, std::size_t line) {
  if (j.is_object() && j.contains("id") && j.at("id").is_string()) return j.at("id").get<std::string>();
  return "line-" + std::to_string(line);
}

/// Non-blank lines of a JSONL file, unparsed, with 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<std::pair<std::size_t, std::string>> out;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") != std::string::npos) out.emplace_back(n, line);
  }
  return out;
}

json edits_json(const CorrectionResult& r) {
  json edits = json::array();
  for (const auto& e : r.edits) {
    edits.push_back({{"entity_index", e.entity_index},
                     {"original", e.original},
                     {"replacement", e.replacement},
                     {"score", e.score}});
  }
  return edits;
}

json trace_json(const CorrectionResult& r) {
  json entities = json::array();
  for (const auto& t : r.trace) {
    json cands = json::array();
    for (const auto& c : t.candidates) {
      cands.push_back({{"evidence_entity", c.evidence_entity}, {"surface", c.surface}, {"score", c.score}});
    }
    entities.push_back({{"surface", t.surface},
                        {"type", std::string(to_string(t.etype))},
                        {"erroneous_score", t.erroneous_score},
                        {"detected", t.detected},
                        {"candidates", cands}});
  }
  return {{"entities", entities}, {"text", format_trace(r)}};
}

EvidenceMode parse_variant(const std::string& v) {
  if (v == "evidence") return EvidenceMode::kSelected;
  if (v == "full-article") return EvidenceMode::kFullArticle;
  throw std::invalid_argument("unknown variant '" + v + "' (expected evidence or full-article)");
}

/// Runs `f(i)` for i in [0, n) on `jobs` threads.
template <typename F>
void parallel_for(std::size_t n, std::size_t jobs, F&& f) {
  jobs = std::max<std::size_t>(1, std::min(jobs, n));
  if (jobs <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  std::vector<std::thread> workers;
  for (std::size_t w = 0; w < jobs; ++w) {
    workers.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += jobs) f(i);
    });
  }
  for (auto& t : workers) t.join();
}

// ---------------------------------------------------------------------------
// Subcommands

int cmd_gen_corpus(const RunConfig& c, const std::string& out, const std::string& prefix) {
  const auto m = materialize("gen-corpus", c);
  synth::GeneratorOptions opt;
  opt.id_prefix = prefix;
  std::vector<json> rows;
  for (const auto& d : synth::generate_corpus(c.gen_count, c.gen_seed, opt)) {
    json j = to_json(d);
    j["fingerprint"] = m.fingerprint;
    rows.push_back(std::move(j));
  }
  write_jsonl(out, rows);
  std::cerr << "wrote " << rows.size() << " documents to " << out << '\n';
  return 0;
}

int cmd_build_corpus(const RunConfig& c, const std::string& input, const std::string& out, std::string stats_path) {
  if (!(c.ratio >= 0.0 && c.ratio <= 1.0)) throw std::invalid_argument("--ratio must lie in [0, 1]");
  const auto m = materialize("build-corpus", c);
  const auto docs = read_documents(input);
  Rng rng(c.corpus_seed);
  const Dataset ds = build_dataset(docs, c.ratio, rng);
  std::vector<json> rows;
  for (const auto& t : ds.triples) {
    json j = to_json(t);
    j["fingerprint"] = m.fingerprint;
    rows.push_back(std::move(j));
  }
  write_jsonl(out, rows);
  if (stats_path.empty()) stats_path = sidecar_path(out);
  write_json_file(stats_path, {{"documents", ds.stats.documents},
                               {"corrupted_count", ds.stats.corrupted},
                               {"skipped", ds.stats.skipped},
                               {"skipped_ids", ds.stats.skipped_ids},
                               {"requested_ratio", c.ratio},
                               {"realized_ratio", ds.stats.realized_ratio()},
                               {"seed", c.corpus_seed},
                               {"config", m.config},
                               {"fingerprint", m.fingerprint}});
  for (const auto& id : ds.stats.skipped_ids) std::cerr << "skipped (no corruptible entity): " << id << '\n';
  std::cerr << "wrote " << rows.size() << " triples (" << ds.stats.corrupted << " corrupted) to " << out << '\n';
  return 0;
}

int cmd_train(const RunConfig& c, const std::string& triples_path, const std::string& out,
              const std::string& validation_path) {
  const auto m = materialize("train", c);
  const auto triples = read_triples(triples_path);
  std::vector<Triple> validation;
  if (!validation_path.empty()) validation = read_triples(validation_path);
  if (triples.empty()) throw EmptyCorpus();

  json history = json::array();
  auto result = train(triples, c.train, c.encoder, validation_path.empty() ? nullptr : &validation,
                      [&](const EpochStats& s) {
                        json line = {{"epoch", s.epoch}, {"train_loss", s.train_loss}, {"fingerprint", m.fingerprint}};
                        line["validation_loss"] = s.validation_loss ? json(*s.validation_loss) : json(nullptr);
                        std::cout << line.dump() << std::endl;
                        history.push_back(line);
                      });
  const json run = {{"config", m.config},
                    {"fingerprint", m.fingerprint},
                    {"history", history},
                    {"examples", triples.size()},
                    {"rejected", result.prepare.rejected},
                    {"target_missing", result.prepare.target_missing}};
  save_checkpoint(result.model, out, run);
  std::cerr << "rejected " << result.prepare.rejected << " examples (summary too long); "
            << result.prepare.target_missing << " corrupted examples lack the original entity in evidence\n"
            << "wrote " << out << '\n';
  return 0;
}

Model load_model_with_overrides(const std::string& path, const RunConfig& c) {
  Model model = load_checkpoint(path);
  if (c.thr_det) model.thresholds.detection = *c.thr_det;
  if (c.thr_cor) model.thresholds.correction = *c.thr_cor;
  return model;
}

int cmd_correct(const RunConfig& c, const std::string& model_path, const std::string& input, const std::string& out,
                bool trace) {
  const Model model = load_model_with_overrides(model_path, c);
  const auto m = materialize("correct", c, model_config_json(model));
  InferenceOptions options;
  options.mode = parse_variant(c.variant);

  const auto lines = read_lines(input);
  std::vector<json> rows(lines.size());
  std::size_t errors = 0;
  const auto t0 = std::chrono::steady_clock::now();
  parallel_for(lines.size(), c.jobs, [&](std::size_t i) {
    const auto& [lineno, text] = lines[i];
    json row;
    try {
      const json j = json::parse(text);
      row["id"] = record_id(j, lineno);
      const auto [summary, article] = summary_and_article(j);
      const CorrectionResult r = correct(model, summary, article, options);
      row["output"] = r.output_text;
      row["edits"] = edits_json(r);
      row["evidence"] = r.evidence_sentences;
      row["summary_too_long"] = r.summary_too_long;
      if (trace) row["trace"] = trace_json(r);
    } catch (const std::exception& e) {
      if (!row.contains("id")) row["id"] = "line-" + std::to_string(lineno);
      row["error"] = e.what();
    }
    row["fingerprint"] = m.fingerprint;
    rows[i] = std::move(row);
  });
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  for (const auto& r : rows) {
    if (r.contains("error")) {
      ++errors;
      std::cerr << "error in " << r.at("id").get<std::string>() << ": " << r.at("error").get<std::string>() << '\n';
    }
  }
  write_jsonl(out, rows);
  write_json_file(sidecar_path(out),
                  {{"n_examples", rows.size()},
                   {"errors", errors},
                   {"wall_clock", seconds},
                   {"samples_per_min", seconds > 0 ? 60.0 * static_cast<double>(rows.size()) / seconds : 0.0},
                   {"jobs", c.jobs},
                   {"config", m.config},
                   {"fingerprint", m.fingerprint}});
  std::cerr << "corrected " << rows.size() - errors << " of " << rows.size() << " inputs\n";
  return 0;
}

std::map<std::string, Consistency> read_labels(const std::string& path) {
  std::map<std::string, Consistency> out;
  for (const auto& j : read_jsonl(path)) out[j.at("id").get<std::string>()] = parse_consistency(j.at("label").get<std::string>());
  return out;
}

std::map<std::string, Adjudication> read_adjudication(const std::string& path) {
  std::map<std::string, Adjudication> out;
  for (const auto& j : read_jsonl(path)) {
    out[j.at("id").get<std::string>()] = Adjudication{parse_consistency(j.at("label_before").get<std::string>()),
                                                       parse_consistency(j.at("label_after").get<std::string>())};
  }
  return out;
}

json bucket_json(const BucketCounts& b) {
  json j = {{"count", b.count}, {"edited", b.edited}};
  j["changed"] = b.changed ? json(*b.changed) : json(nullptr);
  return j;
}

int cmd_eval(const RunConfig& c, const std::string& results_path, const std::string& gold_path,
             const std::string& labels_path, const std::string& adjudication_path, const std::string& report_path,
             std::string timing_path) {
  const auto m = materialize("eval", c);
  const auto results = read_jsonl(results_path);
  const auto gold_rows = read_jsonl(gold_path);
  if (results.size() != gold_rows.size()) {
    throw LengthMismatch(std::to_string(results.size()) + " results for " + std::to_string(gold_rows.size()) +
                         " gold triples");
  }
  std::map<std::string, Consistency> labels;
  if (!labels_path.empty()) labels = read_labels(labels_path);
  std::map<std::string, Adjudication> adjudication;
  if (!adjudication_path.empty()) adjudication = read_adjudication(adjudication_path);

  std::vector<std::string> outputs, gold;
  std::vector<LabelledOutcome> outcomes;
  std::size_t failed = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    const json& r = results[i];
    const Triple t = triple_from_json(gold_rows[i]);
    const std::string id = r.value("id", std::string());
    if (id != t.id) throw LengthMismatch("result " + std::to_string(i + 1) + " has id '" + id + "', gold has '" + t.id + "'");
    if (r.contains("error")) ++failed;
    outputs.push_back(r.value("output", std::string()));
    gold.push_back(t.target_summary.text);

    LabelledOutcome o;
    o.id = id;
    if (labels_path.empty()) {
      o.label = t.corruption ? Consistency::kInconsistent : Consistency::kConsistent;
    } else {
      auto it = labels.find(id);
      if (it == labels.end()) throw LengthMismatch("no label for '" + id + "'");
      o.label = it->second;
    }
    o.edits = r.contains("edits") ? r.at("edits").size() : 0;
    outcomes.push_back(std::move(o));
  }

  const FactccCounts counts = factcc_counts(outcomes, adjudication_path.empty() ? nullptr : &adjudication);
  json report = {{"exact_match_accuracy", exact_match_accuracy(outputs, gold)},
                 {"n_examples", results.size()},
                 {"failed_examples", failed},
                 {"buckets", {{"consistent", bucket_json(counts.consistent)},
                              {"inconsistent", bucket_json(counts.inconsistent)}}},
                 {"config", m.config},
                 {"fingerprint", m.fingerprint}};
  if (timing_path.empty() && std::filesystem::exists(sidecar_path(results_path))) timing_path = sidecar_path(results_path);
  report["samples_per_min"] = nullptr;
  report["wall_clock"] = nullptr;
  report["jobs"] = nullptr;
  if (!timing_path.empty()) {
    const json timing = read_json_file(timing_path);
    report["samples_per_min"] = timing.at("samples_per_min");
    report["wall_clock"] = timing.at("wall_clock");
    report["jobs"] = timing.at("jobs");
  }
  write_json_file(report_path, report);
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_bench(const RunConfig& c, const std::string& model_path, const std::string& input,
              const std::string& report_path, bool retag) {
  const Model model = load_model_with_overrides(model_path, c);
  const auto m = materialize("bench", c, model_config_json(model));
  std::vector<Document> docs;
  for (const auto& j : read_jsonl(input)) {
    auto [summary, article] = summary_and_article(j);
    docs.push_back(Document{j.value("id", std::string()), std::move(article), std::move(summary)});
  }
  if (docs.size() < kMinThroughputInputs) {
    throw std::invalid_argument("bench needs at least " + std::to_string(kMinThroughputInputs) +
                                " inputs (one warm-up batch is excluded); " + input + " has " +
                                std::to_string(docs.size()) + ". Generate more with `entfix gen-corpus`.");
  }
  std::vector<std::string> variants;
  if (c.variant == "both") {
    variants = {"evidence", "full-article"};
  } else {
    parse_variant(c.variant);
    variants = {c.variant};
  }
  ThroughputOptions opt;
  opt.batch_size = c.bench_batch_size;
  opt.jobs = c.jobs;
  opt.retag = retag;
  opt.passes = c.bench_passes;

  json per_variant = json::object();
  for (const auto& v : variants) {
    opt.mode = parse_variant(v);
    json runs = json::array();
    double lo = 0.0, hi = 0.0, sum = 0.0;
    for (std::size_t r = 0; r < std::max<std::size_t>(1, c.bench_repeats); ++r) {
      const ThroughputResult t = measure_throughput(model, docs, opt);
      runs.push_back({{"samples_per_min", t.samples_per_min},
                      {"seconds", t.seconds},
                      {"measured", t.measured},
                      {"warmup", t.warmup},
                      {"encoder_positions", t.total_tokens}});
      lo = r == 0 ? t.samples_per_min : std::min(lo, t.samples_per_min);
      hi = r == 0 ? t.samples_per_min : std::max(hi, t.samples_per_min);
      sum += t.samples_per_min;
      std::cerr << v << " run " << r + 1 << ": " << t.samples_per_min << " samples/min\n";
    }
    per_variant[v] = {{"runs", runs},
                      {"samples_per_min", sum / static_cast<double>(runs.size())},
                      {"spread", lo > 0.0 ? hi / lo - 1.0 : 0.0}};
  }
  json report = {{"variants", per_variant},
                 {"n_inputs", docs.size()},
                 {"batch_size", c.bench_batch_size},
                 {"passes", c.bench_passes},
                 {"jobs", c.jobs},
                 {"retag", retag},
                 {"machine", machine_fingerprint()},
                 {"config", m.config},
                 {"fingerprint", m.fingerprint}};
  if (per_variant.contains("evidence") && per_variant.contains("full-article")) {
    const double ev = per_variant["evidence"]["samples_per_min"].get<double>();
    const double fa = per_variant["full-article"]["samples_per_min"].get<double>();
    report["evidence_faster"] = ev > fa;
    report["speedup"] = fa > 0.0 ? ev / fa : 0.0;
  }
  write_json_file(report_path, report);
  std::cout << report.dump() << '\n';
  return 0;
}

int cmd_retrieve(const RunConfig& c, const std::string& input, const std::string& out) {
  const auto m = materialize("retrieve", c);
  std::vector<json> rows;
  for (const auto& j : read_jsonl(input)) {
    const auto [summary, article] = summary_and_article(j);
    const EvidenceSet ev = select_evidence(summary, article, c.train.evidence_k);
    json sentences = json::array();
    for (const auto& s : ev.sentences) {
      sentences.push_back({{"index", s.article_index}, {"text", article.sentence_text(s.article_index)}});
    }
    json ann = to_json(AnnotatedText{ev.text, {}, ev.entities});
    rows.push_back({{"id", j.value("id", std::string())},
                    {"m", ev.m()},
                    {"sentences", sentences},
                    {"text", ev.text},
                    {"entities", ann.at("entities")},
                    {"fingerprint", m.fingerprint}});
  }
  write_jsonl(out, rows);
  return 0;
}

// ---------------------------------------------------------------------------

void add_config_flags(CLI::App* app, Overrides& o) {
  app->add_option("--config", o.config_path, "JSON config file; flags override its values")->check(CLI::ExistingFile);
  app->add_option("--jobs", o.jobs, "Worker threads for data-parallel work");
}

void add_train_flags(CLI::App* app, Overrides& o) {
  app->add_option("--epochs", o.epochs, "Training epochs");
  app->add_option("--lr", o.learning_rate, "Adam learning rate");
  app->add_option("--batch-size", o.batch_size, "Minibatch size");
  app->add_option("--seed", o.seed, "Seed for initialization and shuffling");
  app->add_option("--d-model", o.d_model, "Encoder width");
  app->add_option("--layers", o.n_layers, "Encoder layers");
  app->add_option("--heads", o.n_heads, "Attention heads");
  app->add_option("--d-ff", o.d_ff, "Feed-forward width");
  app->add_option("--max-len", o.max_len, "Maximum input length in tokens");
  app->add_option("--thr-det", o.thr_det, "Detection threshold stored in the model");
  app->add_option("--thr-cor", o.thr_cor, "Correction threshold stored in the model");
  app->add_option("--evidence-k", o.evidence_k, "Evidence sentences per summary sentence");
  app->add_option("--min-count", o.min_count, "Minimum token count for the vocabulary");
  app->add_flag("--unmasked-correction", o.unmasked, "Train correction scores on every summary entity row");
  app->add_flag("--no-match-feature", o.no_match_feature, "Disable the exact-match input embedding");
}

RunConfig resolve(const Overrides& o, bool training) {
  RunConfig c;
  if (!o.config_path.empty()) update_from_json(c, read_json_file(o.config_path));
  auto set = [](auto& dst, const auto& src) {
    if (src) dst = *src;
  };
  set(c.train.epochs, o.epochs);
  set(c.train.learning_rate, o.learning_rate);
  set(c.train.batch_size, o.batch_size);
  set(c.encoder.d_model, o.d_model);
  set(c.encoder.n_layers, o.n_layers);
  set(c.encoder.n_heads, o.n_heads);
  set(c.encoder.d_ff, o.d_ff);
  set(c.encoder.max_len, o.max_len);
  set(c.train.evidence_k, o.evidence_k);
  set(c.train.min_count, o.min_count);
  set(c.ratio, o.ratio);
  set(c.jobs, o.jobs);
  set(c.bench_batch_size, o.bench_batch_size);
  set(c.bench_repeats, o.bench_repeats);
  set(c.bench_passes, o.bench_passes);
  set(c.gen_count, o.count);
  set(c.variant, o.variant);
  if (training) {
    set(c.train.seed, o.seed);
    set(c.train.thr_det, o.thr_det);
    set(c.train.thr_cor, o.thr_cor);
  } else {
    if (o.thr_det) c.thr_det = o.thr_det;
    if (o.thr_cor) c.thr_cor = o.thr_cor;
  }
  if (o.unmasked) c.train.mask_correction_rows = false;
  if (o.no_match_feature) c.encoder.match_feature = false;
  if (c.jobs == 0) c.jobs = 1;
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Entity-level factual error correction for summaries"};
  app.require_subcommand(1);

  Overrides o;
  std::string input, out, model, triples, validation, results, gold, labels, adjudication, report, stats, timing;
  std::string prefix = "doc";
  bool trace = false, no_retag = false;
  std::optional<std::uint64_t> gen_seed, corpus_seed;

  auto* gen = app.add_subcommand("gen-corpus", "Generate a synthetic annotated news corpus");
  add_config_flags(gen, o);
  gen->add_option("--count", o.count, "Number of documents");
  gen->add_option("--seed", gen_seed, "Generator seed");
  gen->add_option("--prefix", prefix, "Document id prefix");
  gen->add_option("--out", out, "Output documents JSONL")->required();

  auto* build = app.add_subcommand("build-corpus", "Corrupt summaries into training triples");
  add_config_flags(build, o);
  build->add_option("--input", input, "Documents JSONL")->required();
  build->add_option("--out", out, "Output triples JSONL")->required();
  build->add_option("--ratio", o.ratio, "Fraction of summaries to corrupt");
  build->add_option("--seed", corpus_seed, "Corruption seed");
  build->add_option("--stats", stats, "Stats sidecar path (default: <out>.stats.json)");

  auto* trn = app.add_subcommand("train", "Train a model on triples");
  add_config_flags(trn, o);
  add_train_flags(trn, o);
  trn->add_option("--triples", triples, "Training triples JSONL")->required();
  trn->add_option("--validation", validation, "Validation triples JSONL");
  trn->add_option("--out", out, "Output checkpoint")->required();

  auto* cor = app.add_subcommand("correct", "Correct summaries with a trained model");
  add_config_flags(cor, o);
  cor->add_option("--model", model, "Checkpoint")->required();
  cor->add_option("--input", input, "Documents or triples JSONL")->required();
  cor->add_option("--out", out, "Output results JSONL")->required();
  cor->add_flag("--trace", trace, "Include per-entity score traces");
  cor->add_option("--variant", o.variant, "evidence or full-article");
  cor->add_option("--thr-det", o.thr_det, "Override the detection threshold");
  cor->add_option("--thr-cor", o.thr_cor, "Override the correction threshold");

  auto* ev = app.add_subcommand("eval", "Score correction results");
  add_config_flags(ev, o);
  ev->add_option("--results", results, "Results JSONL from correct")->required();
  ev->add_option("--gold", gold, "Gold triples JSONL")->required();
  ev->add_option("--labels", labels, "Consistency labels JSONL");
  ev->add_option("--adjudication", adjudication, "Adjudication JSONL");
  ev->add_option("--timing", timing, "Timing sidecar (default: <results>.stats.json when present)");
  ev->add_option("--report", report, "Output report JSON")->required();

  auto* bench = app.add_subcommand("bench", "Measure end-to-end correction throughput");
  add_config_flags(bench, o);
  bench->add_option("--model", model, "Checkpoint")->required();
  bench->add_option("--input", input, "Documents or triples JSONL (at least 30)")->required();
  bench->add_option("--variant", o.variant, "evidence, full-article or both");
  bench->add_option("--batch-size", o.bench_batch_size, "Inputs per batch");
  bench->add_option("--repeats", o.bench_repeats, "Timed runs per variant");
  bench->add_option("--passes", o.bench_passes, "Timed passes over the inputs within each run");
  bench->add_flag("--no-retag", no_retag, "Use the stored annotations instead of tagging raw text");
  bench->add_option("--report", report, "Output report JSON")->required();

  auto* ret = app.add_subcommand("retrieve", "Print the selected evidence for each document");
  add_config_flags(ret, o);
  ret->add_option("--input", input, "Documents or triples JSONL")->required();
  ret->add_option("--out", out, "Output evidence JSONL")->required();
  ret->add_option("--k", o.evidence_k, "Evidence sentences per summary sentence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (gen->parsed()) {
      RunConfig c = resolve(o, false);
      if (gen_seed) c.gen_seed = *gen_seed;
      return cmd_gen_corpus(c, out, prefix);
    }
    if (build->parsed()) {
      RunConfig c = resolve(o, false);
      if (corpus_seed) c.corpus_seed = *corpus_seed;
      require_readable(input);
      return cmd_build_corpus(c, input, out, stats);
    }
    if (trn->parsed()) {
      require_readable(triples);
      if (!validation.empty()) require_readable(validation);
      return cmd_train(resolve(o, true), triples, out, validation);
    }
    if (cor->parsed()) {
      require_readable(model);
      require_readable(input);
      return cmd_correct(resolve(o, false), model, input, out, trace);
    }
    if (ev->parsed()) {
      require_readable(results);
      require_readable(gold);
      return cmd_eval(resolve(o, false), results, gold, labels, adjudication, report, timing);
    }
    if (bench->parsed()) {
      require_readable(model);
      require_readable(input);
      RunConfig c = resolve(o, false);
      if (!o.variant) c.variant = "both";
      return cmd_bench(c, model, input, report, !no_retag);
    }
    if (ret->parsed()) {
      require_readable(input);
      return cmd_retrieve(resolve(o, false), input, out);
    }
  } catch (const entfix::Error& e) {
    std::cerr << "entfix: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "entfix: " << e.what() << '\n';
    return kExitDomain;
  } catch (const std::exception& e) {
    std::cerr << "entfix: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
