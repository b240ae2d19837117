#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace handsynth {

enum class ErrorCode {
  // asset_store
  MissingBlob,
  ShapeMismatch,
  ChecksumMismatch,
  InvalidWeights,
  InvalidAsset,
  // hand_model
  DimensionMismatch,
  NonFinitePose,
  RingCountMismatch,
  // scene_sampler
  EmptyBank,
  EmptyPool,
  SourceTooSmall,
  // renderer
  BehindCamera,
  // compositor
  EmptyMask,
  // interact
  ParseError,
  DegenerateMesh,
  UnresolvedReference,
  // dataset_io
  IoError,
  InvariantViolation,
  MissingSample,
  DuplicateId,
  ManifestMismatch,
  MissingManifest,
  // metrics
  DegenerateInput,
  EmptyInput,
  // cli
  ConfigError,
};

std::string_view to_string(ErrorCode code);

// Library-wide exception. Every failure surfaced by handsynth carries a code so
// callers (and the CLI exit-code mapping) can branch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace handsynth
