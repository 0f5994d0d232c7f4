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

#include "entfix/checkpoint.hpp"
#include "entfix/corpus.hpp"
#include "entfix/corpus_io.hpp"
#include "entfix/encoder.hpp"
#include "entfix/errors.hpp"
#include "entfix/eval.hpp"
#include "entfix/model.hpp"
#include "entfix/optimizer.hpp"
#include "entfix/pipeline.hpp"
#include "entfix/retrieval.hpp"
#include "entfix/rng.hpp"
#include "entfix/run.hpp"
#include "entfix/scoring.hpp"
#include "entfix/synth.hpp"
#include "entfix/text.hpp"
#include "entfix/utf8.hpp"
#include "entfix/vocab.hpp"
