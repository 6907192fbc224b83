#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace saber {

enum class ErrorKind {
  MissingFile,
  MalformedRow,
  UnsortedOrDuplicateDate,
  UnknownSymbol,
  LookAheadViolation,
  InsufficientHistory,
  DateNotInCalendar,
  SingularDesignMatrix,
  InvalidParameter,
  EmptyCandidateSet,
  NoEligibleCandidates,
  DegenerateReturns,
  ZeroShares,
  NonPositivePrice,
  NoBarsInWindow,
  EmptyRange,
  EmptyResults,
  LengthMismatch,
  TotalLoss,
  ZeroDays,
  TooFewObservations,
  NonPositiveValue,
  NoDataForYear,
  DegenerateRegressor,
  ZeroVarianceDifferences,
  InvalidDf,
  SpawnFailure,
  HandshakeTimeout,
  VersionMismatch,
  ProtocolError,
  Timeout,
  BrokenPipe,
  ConfigError,
  DataError,
  MissingArtifacts,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace saber
