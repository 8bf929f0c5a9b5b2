// Copyright 2026 The fauxnet Authors
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
#include <string_view>

namespace fauxnet {

// Every failure the toolkit reports carries one of these codes so callers
// (and the CLI exit-status mapping) can branch without parsing messages.
enum class ErrorCode {
  // bank / manifest
  BadMagic,
  VersionMismatch,
  DimensionMismatch,
  NonFiniteValue,
  TruncatedFile,
  TrailingBytes,
  InvariantViolation,
  IoFailure,
  ManifestMismatch,
  // splits
  TooFewIdentities,
  InvalidRatios,
  UnknownTechnique,
  EmptyTrainClass,
  // nn core
  BatchTooSmall,
  ShapeMismatch,
  StaleTape,
  NonFiniteGradient,
  InvalidConfig,
  // model / metrics
  EmptySequence,
  MissingTechniqueLabel,
  DegenerateSplit,
  EmptyReference,
  SingleClass,
  TooFewSamples,
  DegenerateComponent,
  LabelOutOfRange,
  InvalidSpec,
  ParseError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::VersionMismatch: return "VersionMismatch";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFiniteValue: return "NonFiniteValue";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::TrailingBytes: return "TrailingBytes";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::TooFewIdentities: return "TooFewIdentities";
    case ErrorCode::InvalidRatios: return "InvalidRatios";
    case ErrorCode::UnknownTechnique: return "UnknownTechnique";
    case ErrorCode::EmptyTrainClass: return "EmptyTrainClass";
    case ErrorCode::BatchTooSmall: return "BatchTooSmall";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::StaleTape: return "StaleTape";
    case ErrorCode::NonFiniteGradient: return "NonFiniteGradient";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::EmptySequence: return "EmptySequence";
    case ErrorCode::MissingTechniqueLabel: return "MissingTechniqueLabel";
    case ErrorCode::DegenerateSplit: return "DegenerateSplit";
    case ErrorCode::EmptyReference: return "EmptyReference";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::TooFewSamples: return "TooFewSamples";
    case ErrorCode::DegenerateComponent: return "DegenerateComponent";
    case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace fauxnet
