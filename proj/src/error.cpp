#include "isac/error.hpp"

namespace isac {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooManyBeams: return "TooManyBeams";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::PlanInvalid: return "PlanInvalid";
    case ErrorCode::EigSolverFailure: return "EigSolverFailure";
    case ErrorCode::DuplicateGenerators: return "DuplicateGenerators";
    case ErrorCode::DegenerateElevation: return "DegenerateElevation";
    case ErrorCode::NullInput: return "NullInput";
    case ErrorCode::SingularScale: return "SingularScale";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::RankDeficientGeometry: return "RankDeficientGeometry";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace isac
