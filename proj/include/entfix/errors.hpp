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

#include <stdexcept>
#include <string>

namespace entfix {

/// Base class for all domain errors raised by the library. The CLI maps
/// these to exit code 1; I/O and usage problems use plain std exceptions.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidAnnotation : public Error {
 public:
  using Error::Error;
};

class NoCorruptibleEntity : public Error {
 public:
  NoCorruptibleEntity() : Error("summary has no entity with a distinct same-type replacement") {}
};

class EmptyCorpus : public Error {
 public:
  EmptyCorpus() : Error("corpus is empty") {}
};

class SummaryTooLong : public Error {
 public:
  explicit SummaryTooLong(std::size_t needed, std::size_t max_len)
      : Error("summary needs " + std::to_string(needed) + " tokens with the probe token; max_len is " +
              std::to_string(max_len)) {}
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class EmptyPrediction : public Error {
 public:
  EmptyPrediction() : Error("detection loss needs at least one summary entity") {}
};

class AllExamplesRejected : public Error {
 public:
  AllExamplesRejected() : Error("every training example was rejected while building inputs") {}
};

class LengthMismatch : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace entfix
