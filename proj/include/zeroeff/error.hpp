#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace zeroeff {

enum class ErrorKind {
  // dataset
  MissingColumn,
  NonNumericCell,
  NegativeOutcome,
  EmptyDataset,
  FileNotFound,
  NonPositiveScale,
  DuplicateRole,
  NonBinaryColumn,
  // transforms
  DomainError,
  MonotonicityViolation,
  NonFiniteInput,
  // regression
  RankDeficient,
  TooFewClusters,
  DimensionMismatch,
  // poisson
  Separation,
  NoConvergence,
  AllZeroOutcome,
  EmptyCell,
  ZeroCellMean,
  CollinearPeriods,
  // scale sensitivity
  NoExtensiveMargin,
  BracketNotFound,
  // target params
  ZeroControlMean,
  ZeroControlMedian,
  NonPositiveDenominator,
  EmptyReference,
  NoPositiveOutcomes,
  // bounds
  ZeroTrimDenominator,
  InvalidC,
  DegenerateShares,
  NoAlwaysTakers,
  ZeroComplierControlMean,
  MissingInstrument,
  WeakFirstStage,
  // inference
  EstimatorFailedOnDraw,
  InvalidBootstrapSpec,
  // identification lab
  InfeasibleMarginals,
  UnboundedG,
  MonotonicityCellViolated,
  LpSizeExceeded,
  // cli / config
  InvalidConfig,
};

std::string_view to_string(ErrorKind kind);

/// Every failure raised by the library carries a machine-readable kind.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& detail)
      : std::runtime_error(std::string(to_string(kind)) + ": " + detail), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace zeroeff
