#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/estimate.hpp"
#include "zeroeff/inference.hpp"

#include <optional>
#include <vector>

namespace zeroeff {

/// (mean1 - mean0) / mean0 with delta-method SE from the [1, D] regression.
EstimateResult ate_pct_means(const Dataset& d, const InferenceOptions& inf = {});

/// (median1 - median0) / median0 under the left-continuous quantile;
/// SE from the cluster bootstrap.
EstimateResult median_pct(const Dataset& d, const BootstrapSpec& boot = {});
double median_pct_value(const Dataset& d);

/// ATE of Y / X for covariate column `denominator`. With Engine::Covariates
/// the remaining covariates enter as controls.
EstimateResult normalized_outcome_ate(const Dataset& d, std::size_t denominator, Engine engine = Engine::DiffMeans,
                                      const InferenceOptions& inf = {});

/// ATE of the empirical-CDF rank. Without a reference the pooled control
/// outcomes are used.
EstimateResult rank_ate(const Dataset& d, std::optional<std::vector<double>> reference = std::nullopt,
                        Engine engine = Engine::DiffMeans, const InferenceOptions& inf = {});

struct ThresholdProfile {
  std::vector<double> thresholds;
  std::vector<EstimateResult> effects;
};

/// ATE of 1[Y >= y] per threshold; thresholds strictly increasing.
ThresholdProfile threshold_profile(const Dataset& d, const std::vector<double>& thresholds,
                                   Engine engine = Engine::DiffMeans, const InferenceOptions& inf = {});

/// ATE (or DiD interaction) of log(Y / y_min) with m(0) = -x, y_min the
/// in-sample minimum positive outcome (reported in meta["y_min"]).
EstimateResult calibrated_ate(const Dataset& d, double x, bool did = false, Engine engine = Engine::DiffMeans,
                              const InferenceOptions& inf = {});

}  // namespace zeroeff
