#pragma once

#include <stdexcept>
#include <string>

namespace isac {

enum class ErrorCode {
  DegenerateGeometry,
  ShapeMismatch,
  TooManyBeams,
  RankDeficient,
  PlanInvalid,
  EigSolverFailure,
  DuplicateGenerators,
  DegenerateElevation,
  NullInput,
  SingularScale,
  EmptyGraph,
  RankDeficientGeometry,
  InvalidConfig,
  IoError,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace isac
