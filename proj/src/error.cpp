#include "finprog/error.hpp"

namespace finprog {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedProgram: return "MalformedProgram";
    case ErrorKind::BadStepRef: return "BadStepRef";
    case ErrorKind::UnknownOperator: return "UnknownOperator";
    case ErrorKind::ForwardStepRef: return "ForwardStepRef";
    case ErrorKind::MissingEOF: return "MissingEOF";
    case ErrorKind::NotANumber: return "NotANumber";
    case ErrorKind::UnknownConstant: return "UnknownConstant";
    case ErrorKind::RowNotFound: return "RowNotFound";
    case ErrorKind::EmptyRow: return "EmptyRow";
    case ErrorKind::DivisionByZero: return "DivisionByZero";
    case ErrorKind::TypeMismatch: return "TypeMismatch";
    case ErrorKind::NumericDomain: return "NumericDomain";
    case ErrorKind::EmptyGold: return "EmptyGold";
    case ErrorKind::DegenerateLabels: return "DegenerateLabels";
    case ErrorKind::NonFiniteFeature: return "NonFiniteFeature";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::ModelSetMismatch: return "ModelSetMismatch";
    case ErrorKind::NoCandidates: return "NoCandidates";
    case ErrorKind::DatasetIdMismatch: return "DatasetIdMismatch";
    case ErrorKind::PoolTooSmall: return "PoolTooSmall";
    case ErrorKind::EmptyReport: return "EmptyReport";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptyLinearization: return "EmptyLinearization";
    case ErrorKind::UncoveredFact: return "UncoveredFact";
    case ErrorKind::MissingPlaceholder: return "MissingPlaceholder";
    case ErrorKind::DuplicatePlaceholder: return "DuplicatePlaceholder";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::SchemaViolation: return "SchemaViolation";
  }
  return "UnknownError";
}

}  // namespace finprog
