#include "handsynth/error.hpp"

namespace handsynth {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingBlob: return "MissingBlob";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
    case ErrorCode::InvalidWeights: return "InvalidWeights";
    case ErrorCode::InvalidAsset: return "InvalidAsset";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonFinitePose: return "NonFinitePose";
    case ErrorCode::RingCountMismatch: return "RingCountMismatch";
    case ErrorCode::EmptyBank: return "EmptyBank";
    case ErrorCode::EmptyPool: return "EmptyPool";
    case ErrorCode::SourceTooSmall: return "SourceTooSmall";
    case ErrorCode::BehindCamera: return "BehindCamera";
    case ErrorCode::EmptyMask: return "EmptyMask";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DegenerateMesh: return "DegenerateMesh";
    case ErrorCode::UnresolvedReference: return "UnresolvedReference";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::InvariantViolation: return "InvariantViolation";
    case ErrorCode::MissingSample: return "MissingSample";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::ManifestMismatch: return "ManifestMismatch";
    case ErrorCode::MissingManifest: return "MissingManifest";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace handsynth
