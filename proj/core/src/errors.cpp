#include "vlaforge/errors.hpp"

namespace vlaforge {

std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema: return "SchemaError";
    case ErrorKind::kOrder: return "OrderError";
    case ErrorKind::kGeometry: return "GeometryError";
    case ErrorKind::kTooShort: return "TooShortError";
    case ErrorKind::kConfig: return "ConfigError";
    case ErrorKind::kDegenerateTrajectory: return "DegenerateTrajectoryError";
    case ErrorKind::kMissingSlot: return "MissingSlotError";
    case ErrorKind::kEmptyTemplateSet: return "EmptyTemplateSetError";
    case ErrorKind::kBudget: return "BudgetError";
    case ErrorKind::kTransport: return "TransportError";
    case ErrorKind::kAuth: return "AuthError";
    case ErrorKind::kRateLimit: return "RateLimitError";
    case ErrorKind::kMalformedResponse: return "MalformedResponseError";
    case ErrorKind::kGridMismatch: return "GridMismatchError";
    case ErrorKind::kEmptyBatch: return "EmptyBatchError";
    case ErrorKind::kDegenerateGeometry: return "DegenerateGeometryError";
    case ErrorKind::kEmptyCandidate: return "EmptyCandidateError";
    case ErrorKind::kCorpusTooSmall: return "CorpusTooSmallError";
    case ErrorKind::kShape: return "ShapeError";
    case ErrorKind::kRange: return "RangeError";
    case ErrorKind::kEmptyCorpus: return "EmptyCorpusError";
    case ErrorKind::kIO: return "IOError";
    case ErrorKind::kMissingInput: return "MissingInputError";
  }
  return "Error";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kRange:
      return 1;
    case ErrorKind::kTransport:
    case ErrorKind::kAuth:
    case ErrorKind::kRateLimit:
    case ErrorKind::kMalformedResponse:
      return 3;
    default:
      return 2;
  }
}

}  // namespace vlaforge
