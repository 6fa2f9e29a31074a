#pragma once

#include <stdexcept>
#include <string>

namespace lwrnet {

// Stable codes for input/model validation failures, so callers and tests can
// distinguish failure kinds without parsing messages.
enum class ValidationCode {
  EmptyNetwork,
  DuplicateVertexId,
  DuplicateEdgeId,
  DanglingEndpoint,
  NonPositiveLength,
  Disconnected,
  UnknownVertex,
  UnknownEdge,
  BadMatrixShape,
  NegativeCoefficient,
  RowSumMismatch,
  NonDivisibleEdgeLength,
  SourceOrSinkVertex,
  EdgeTooShort,
  ClosureLastOutgoing,
  ClosureRowStuck,
  MassMismatch,
  GridMismatch,
  ZeroMass,
  SizeGuard,
  BadParameter,
  BadConfig,
  UnknownKey,
  BadFile,
};

const char* to_string(ValidationCode code);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(ValidationCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ValidationCode code() const noexcept { return code_; }

 private:
  ValidationCode code_;
};

// A time step produced a density outside [0,1]: the time step violates the
// CFL bound or the state handed to the solver was inconsistent.
class CflError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal invariant (e.g. an optimal plan failing its own feasibility
// check). Always a bug, never a user error.
class InternalError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

inline const char* to_string(ValidationCode code) {
  switch (code) {
    case ValidationCode::EmptyNetwork: return "empty network";
    case ValidationCode::DuplicateVertexId: return "duplicate vertex id";
    case ValidationCode::DuplicateEdgeId: return "duplicate edge id";
    case ValidationCode::DanglingEndpoint: return "dangling endpoint";
    case ValidationCode::NonPositiveLength: return "non-positive length";
    case ValidationCode::Disconnected: return "disconnected graph";
    case ValidationCode::UnknownVertex: return "unknown vertex";
    case ValidationCode::UnknownEdge: return "unknown edge";
    case ValidationCode::BadMatrixShape: return "bad matrix shape";
    case ValidationCode::NegativeCoefficient: return "negative coefficient";
    case ValidationCode::RowSumMismatch: return "row sum != 1";
    case ValidationCode::NonDivisibleEdgeLength: return "non-divisible edge length";
    case ValidationCode::SourceOrSinkVertex: return "source or sink vertex";
    case ValidationCode::EdgeTooShort: return "edge too short";
    case ValidationCode::ClosureLastOutgoing: return "closure of the only outgoing edge";
    case ValidationCode::ClosureRowStuck: return "row cannot be renormalized";
    case ValidationCode::MassMismatch: return "mass mismatch";
    case ValidationCode::GridMismatch: return "grid mismatch";
    case ValidationCode::ZeroMass: return "zero mass";
    case ValidationCode::SizeGuard: return "size guard";
    case ValidationCode::BadParameter: return "bad parameter";
    case ValidationCode::BadConfig: return "bad config";
    case ValidationCode::UnknownKey: return "unknown key";
    case ValidationCode::BadFile: return "bad file";
  }
  return "unknown error";
}

}  // namespace lwrnet
