#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace scalespace {

// Broad classes; the CLI maps each class to one process exit code.
enum class ErrorClass {
  Config,
  Ingestion,
  NumericBudget,
  Topology,
  UnresolvedScan,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorClass cls, std::string kind, const std::string& what)
      : std::runtime_error(kind + ": " + what), cls_(cls), kind_(std::move(kind)) {}

  ErrorClass error_class() const noexcept { return cls_; }
  const std::string& kind() const noexcept { return kind_; }

 private:
  ErrorClass cls_;
  std::string kind_;
};

#define SCALESPACE_DEFINE_ERROR(Name, Class)                          \
  class Name : public Error {                                         \
   public:                                                            \
    explicit Name(const std::string& what)                            \
        : Error(ErrorClass::Class, #Name, what) {}                    \
  };

SCALESPACE_DEFINE_ERROR(ConfigError, Config)

SCALESPACE_DEFINE_ERROR(NonUniformSampling, Ingestion)
SCALESPACE_DEFINE_ERROR(NotTransient, Ingestion)
SCALESPACE_DEFINE_ERROR(MalformedInput, Ingestion)

SCALESPACE_DEFINE_ERROR(TruncationFailure, NumericBudget)
SCALESPACE_DEFINE_ERROR(SmoothnessViolation, NumericBudget)
SCALESPACE_DEFINE_ERROR(GridTooCoarse, NumericBudget)
SCALESPACE_DEFINE_ERROR(BudgetExceeded, NumericBudget)
SCALESPACE_DEFINE_ERROR(NoConvergence, NumericBudget)

SCALESPACE_DEFINE_ERROR(DegenerateLevel, Topology)
SCALESPACE_DEFINE_ERROR(TopologyViolation, Topology)
SCALESPACE_DEFINE_ERROR(OrientationAmbiguous, Topology)
SCALESPACE_DEFINE_ERROR(NestingConflict, Topology)
SCALESPACE_DEFINE_ERROR(IndexMismatch, Topology)
SCALESPACE_DEFINE_ERROR(InconsistentEuler, Topology)

SCALESPACE_DEFINE_ERROR(UnresolvedEvent, UnresolvedScan)

#undef SCALESPACE_DEFINE_ERROR

}  // namespace scalespace
