#include "saber/error.hpp"

namespace saber {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::MissingFile: return "MissingFile";
    case ErrorKind::MalformedRow: return "MalformedRow";
    case ErrorKind::UnsortedOrDuplicateDate: return "UnsortedOrDuplicateDate";
    case ErrorKind::UnknownSymbol: return "UnknownSymbol";
    case ErrorKind::LookAheadViolation: return "LookAheadViolation";
    case ErrorKind::InsufficientHistory: return "InsufficientHistory";
    case ErrorKind::DateNotInCalendar: return "DateNotInCalendar";
    case ErrorKind::SingularDesignMatrix: return "SingularDesignMatrix";
    case ErrorKind::InvalidParameter: return "InvalidParameter";
    case ErrorKind::EmptyCandidateSet: return "EmptyCandidateSet";
    case ErrorKind::NoEligibleCandidates: return "NoEligibleCandidates";
    case ErrorKind::DegenerateReturns: return "DegenerateReturns";
    case ErrorKind::ZeroShares: return "ZeroShares";
    case ErrorKind::NonPositivePrice: return "NonPositivePrice";
    case ErrorKind::NoBarsInWindow: return "NoBarsInWindow";
    case ErrorKind::EmptyRange: return "EmptyRange";
    case ErrorKind::EmptyResults: return "EmptyResults";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::TotalLoss: return "TotalLoss";
    case ErrorKind::ZeroDays: return "ZeroDays";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::NonPositiveValue: return "NonPositiveValue";
    case ErrorKind::NoDataForYear: return "NoDataForYear";
    case ErrorKind::DegenerateRegressor: return "DegenerateRegressor";
    case ErrorKind::ZeroVarianceDifferences: return "ZeroVarianceDifferences";
    case ErrorKind::InvalidDf: return "InvalidDf";
    case ErrorKind::SpawnFailure: return "SpawnFailure";
    case ErrorKind::HandshakeTimeout: return "HandshakeTimeout";
    case ErrorKind::VersionMismatch: return "VersionMismatch";
    case ErrorKind::ProtocolError: return "ProtocolError";
    case ErrorKind::Timeout: return "Timeout";
    case ErrorKind::BrokenPipe: return "BrokenPipe";
    case ErrorKind::ConfigError: return "ConfigError";
    case ErrorKind::DataError: return "DataError";
    case ErrorKind::MissingArtifacts: return "MissingArtifacts";
  }
  return "Unknown";
}

}  // namespace saber
