#pragma once

#include <stdexcept>
#include <string>

namespace hsom {

enum class ErrorKind {
  DegenerateSkeleton,
  DegenerateTriangle,
  DimensionMismatch,
  EmptyTrainingSet,
  EmptySequence,
  ZeroVector,
  UnknownLabel,
  MissingLabel,
  EmptyWindow,
  InconsistentObjectSet,
  UnbalancedMarks,
  MalformedRecord,
  InvalidConfig,
  ManifestMismatch,
  ModelFormat,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateSkeleton: return "DegenerateSkeleton";
    case ErrorKind::DegenerateTriangle: return "DegenerateTriangle";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::EmptyTrainingSet: return "EmptyTrainingSet";
    case ErrorKind::EmptySequence: return "EmptySequence";
    case ErrorKind::ZeroVector: return "ZeroVector";
    case ErrorKind::UnknownLabel: return "UnknownLabel";
    case ErrorKind::MissingLabel: return "MissingLabel";
    case ErrorKind::EmptyWindow: return "EmptyWindow";
    case ErrorKind::InconsistentObjectSet: return "InconsistentObjectSet";
    case ErrorKind::UnbalancedMarks: return "UnbalancedMarks";
    case ErrorKind::MalformedRecord: return "MalformedRecord";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
    case ErrorKind::ManifestMismatch: return "ManifestMismatch";
    case ErrorKind::ModelFormat: return "ModelFormat";
  }
  return "Unknown";
}

// All library failures carry a kind so callers (and the CLI exit-code
// mapping) can dispatch without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace hsom
