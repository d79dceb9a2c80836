#pragma once

#include <stdexcept>
#include <string>

namespace pdhw {

// Every recoverable failure in the library throws Error with one of these
// codes. The message carries the human-readable context (file, line number,
// offending value); the code is what callers and tests dispatch on.
enum class Err {
  // cohort ingest
  MalformedLine,
  CountMismatch,
  NonMonotoneTime,
  TooFewOnSurface,
  MalformedRow,
  DuplicateId,
  EmptyGroup,
  // signal processing
  SpanTooLarge,
  SeriesTooShort,
  AllTimestampsEqual,
  StrokeTooShort,
  // kinematics
  ZeroDuration,
  NoStrokes,
  // feature matrix
  EmptyInput,
  TaskUnavailable,
  NoCommonSubjects,
  DegenerateFitSet,
  // statistics
  ConstantLabels,
  NoSignificantFeatures,
  // classifiers
  DimensionMismatch,
  SingleClass,
  EmptyModel,
  TooFewSamples,
  // cross-validation
  ClassTooSmall,
  // synthetic cohorts
  InvalidSpec,
  // generic I/O
  IoFailure,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
public:
  Error(Err code, const std::string& message)
      : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

  Err code() const { return code_; }

private:
  Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace pdhw
