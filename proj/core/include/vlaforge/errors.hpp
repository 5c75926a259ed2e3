#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace vlaforge {

enum class ErrorKind {
  kSchema,
  kOrder,
  kGeometry,
  kTooShort,
  kConfig,
  kDegenerateTrajectory,
  kMissingSlot,
  kEmptyTemplateSet,
  kBudget,
  kTransport,
  kAuth,
  kRateLimit,
  kMalformedResponse,
  kGridMismatch,
  kEmptyBatch,
  kDegenerateGeometry,
  kEmptyCandidate,
  kCorpusTooSmall,
  kShape,
  kRange,
  kEmptyCorpus,
  kIO,
  kMissingInput,
};

std::string_view error_kind_name(ErrorKind kind);

// Process exit status for an error surfaced by the CLI:
// 1 user error, 2 upstream-data error, 3 transport error.
int exit_code_for(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }
  std::string_view kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

#define VLAFORGE_DEFINE_ERROR(Name, Kind)                       \
  class Name : public Error {                                   \
   public:                                                      \
    explicit Name(const std::string& message) : Error(Kind, message) {} \
  };

VLAFORGE_DEFINE_ERROR(SchemaError, ErrorKind::kSchema)
VLAFORGE_DEFINE_ERROR(OrderError, ErrorKind::kOrder)
VLAFORGE_DEFINE_ERROR(GeometryError, ErrorKind::kGeometry)
VLAFORGE_DEFINE_ERROR(TooShortError, ErrorKind::kTooShort)
VLAFORGE_DEFINE_ERROR(ConfigError, ErrorKind::kConfig)
VLAFORGE_DEFINE_ERROR(DegenerateTrajectoryError, ErrorKind::kDegenerateTrajectory)
VLAFORGE_DEFINE_ERROR(EmptyTemplateSetError, ErrorKind::kEmptyTemplateSet)
VLAFORGE_DEFINE_ERROR(BudgetError, ErrorKind::kBudget)
VLAFORGE_DEFINE_ERROR(TransportError, ErrorKind::kTransport)
VLAFORGE_DEFINE_ERROR(AuthError, ErrorKind::kAuth)
VLAFORGE_DEFINE_ERROR(MalformedResponseError, ErrorKind::kMalformedResponse)
VLAFORGE_DEFINE_ERROR(GridMismatchError, ErrorKind::kGridMismatch)
VLAFORGE_DEFINE_ERROR(EmptyBatchError, ErrorKind::kEmptyBatch)
VLAFORGE_DEFINE_ERROR(DegenerateGeometryError, ErrorKind::kDegenerateGeometry)
VLAFORGE_DEFINE_ERROR(EmptyCandidateError, ErrorKind::kEmptyCandidate)
VLAFORGE_DEFINE_ERROR(CorpusTooSmallError, ErrorKind::kCorpusTooSmall)
VLAFORGE_DEFINE_ERROR(ShapeError, ErrorKind::kShape)
VLAFORGE_DEFINE_ERROR(RangeError, ErrorKind::kRange)
VLAFORGE_DEFINE_ERROR(EmptyCorpusError, ErrorKind::kEmptyCorpus)
VLAFORGE_DEFINE_ERROR(IOError, ErrorKind::kIO)
VLAFORGE_DEFINE_ERROR(MissingInputError, ErrorKind::kMissingInput)

#undef VLAFORGE_DEFINE_ERROR

// Raised when a template needs a predicate the fact list cannot supply.
// Carries the template id so the caller can walk the fallback chain.
class MissingSlotError : public Error {
 public:
  MissingSlotError(std::string template_id, std::string missing)
      : Error(ErrorKind::kMissingSlot,
              "template '" + template_id + "' requires '" + missing +
                  "' but no matching fact exists"),
        template_id_(std::move(template_id)),
        missing_(std::move(missing)) {}

  const std::string& template_id() const noexcept { return template_id_; }
  const std::string& missing() const noexcept { return missing_; }

 private:
  std::string template_id_;
  std::string missing_;
};

class RateLimitError : public Error {
 public:
  RateLimitError(const std::string& message,
                 std::optional<double> retry_after_s)
      : Error(ErrorKind::kRateLimit, message), retry_after_s_(retry_after_s) {}

  std::optional<double> retry_after_s() const noexcept { return retry_after_s_; }

 private:
  std::optional<double> retry_after_s_;
};

}  // namespace vlaforge
