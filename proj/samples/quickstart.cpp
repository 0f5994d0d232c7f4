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

// End-to-end library usage: generate a small corpus, corrupt half of the
// summaries, train briefly and correct one summary with a score trace.

#include <iostream>

#include "entfix/entfix.hpp"

int main() {
  using namespace entfix;

  const auto docs = synth::generate_corpus(300, /*seed=*/7);
  Rng rng(3);
  const Dataset data = build_dataset(docs, 0.5, rng);
  std::cout << "triples: " << data.triples.size() << ", corrupted: " << data.stats.corrupted << '\n';

  EncoderConfig encoder;
  encoder.d_model = 32;
  encoder.n_layers = 1;
  encoder.n_heads = 2;
  encoder.d_ff = 64;
  TrainConfig config;
  config.epochs = 8;
  const TrainResult trained = train(data.triples, config, encoder, nullptr, [](const EpochStats& s) {
    std::cout << "epoch " << s.epoch << " loss " << s.train_loss << '\n';
  });

  const AnnotatedText summary = annotate("Valerie Okafor met officials of Harbor Bank in Lisbon on Friday.");
  const AnnotatedText article = annotate(
      "Philippe Okafor met officials of Harbor Bank in Lisbon on Friday. "
      "The meeting lasted 40 minutes. Okafor later flew home.");
  const CorrectionResult result = correct(trained.model, summary, article);
  std::cout << format_trace(result);
  return 0;
}
