#include "zeroeff/error.hpp"

namespace zeroeff {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MissingColumn: return "MissingColumn";
    case ErrorKind::NonNumericCell: return "NonNumericCell";
    case ErrorKind::NegativeOutcome: return "NegativeOutcome";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::FileNotFound: return "FileNotFound";
    case ErrorKind::NonPositiveScale: return "NonPositiveScale";
    case ErrorKind::DuplicateRole: return "DuplicateRole";
    case ErrorKind::NonBinaryColumn: return "NonBinaryColumn";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::MonotonicityViolation: return "MonotonicityViolation";
    case ErrorKind::NonFiniteInput: return "NonFiniteInput";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::TooFewClusters: return "TooFewClusters";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::Separation: return "Separation";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::AllZeroOutcome: return "AllZeroOutcome";
    case ErrorKind::EmptyCell: return "EmptyCell";
    case ErrorKind::ZeroCellMean: return "ZeroCellMean";
    case ErrorKind::CollinearPeriods: return "CollinearPeriods";
    case ErrorKind::NoExtensiveMargin: return "NoExtensiveMargin";
    case ErrorKind::BracketNotFound: return "BracketNotFound";
    case ErrorKind::ZeroControlMean: return "ZeroControlMean";
    case ErrorKind::ZeroControlMedian: return "ZeroControlMedian";
    case ErrorKind::NonPositiveDenominator: return "NonPositiveDenominator";
    case ErrorKind::EmptyReference: return "EmptyReference";
    case ErrorKind::NoPositiveOutcomes: return "NoPositiveOutcomes";
    case ErrorKind::ZeroTrimDenominator: return "ZeroTrimDenominator";
    case ErrorKind::InvalidC: return "InvalidC";
    case ErrorKind::DegenerateShares: return "DegenerateShares";
    case ErrorKind::NoAlwaysTakers: return "NoAlwaysTakers";
    case ErrorKind::ZeroComplierControlMean: return "ZeroComplierControlMean";
    case ErrorKind::MissingInstrument: return "MissingInstrument";
    case ErrorKind::WeakFirstStage: return "WeakFirstStage";
    case ErrorKind::EstimatorFailedOnDraw: return "EstimatorFailedOnDraw";
    case ErrorKind::InvalidBootstrapSpec: return "InvalidBootstrapSpec";
    case ErrorKind::InfeasibleMarginals: return "InfeasibleMarginals";
    case ErrorKind::UnboundedG: return "UnboundedG";
    case ErrorKind::MonotonicityCellViolated: return "MonotonicityCellViolated";
    case ErrorKind::LpSizeExceeded: return "LpSizeExceeded";
    case ErrorKind::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

}  // namespace zeroeff
