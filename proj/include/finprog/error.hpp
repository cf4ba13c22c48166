#pragma once

#include <stdexcept>
#include <string>

namespace finprog {

// Failure classes surfaced by the library. Tests and callers branch on the
// kind, so every throw site must pick the most specific one.
enum class ErrorKind {
  // program text
  MalformedProgram,
  BadStepRef,
  UnknownOperator,
  ForwardStepRef,
  MissingEOF,
  // execution
  NotANumber,
  UnknownConstant,
  RowNotFound,
  EmptyRow,
  DivisionByZero,
  TypeMismatch,
  NumericDomain,
  // metrics / fusion
  EmptyGold,
  DegenerateLabels,
  NonFiniteFeature,
  DimensionMismatch,
  ModelSetMismatch,
  NoCandidates,
  DatasetIdMismatch,
  // splitting
  PoolTooSmall,
  // report processing
  EmptyReport,
  LengthMismatch,
  EmptyLinearization,
  UncoveredFact,
  MissingPlaceholder,
  DuplicatePlaceholder,
  // files and configuration
  FileNotFound,
  IoError,
  SchemaViolation,
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace finprog
