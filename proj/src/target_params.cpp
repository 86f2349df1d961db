#include "zeroeff/target_params.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/io.hpp"
#include "zeroeff/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace zeroeff {

namespace {

EstimateResult treatment_effect(const Dataset& d, const std::vector<double>& y, Engine engine,
                                const InferenceOptions& inf, std::string estimator, std::string transform) {
  const FitResult f = ols_fit(treatment_design(d, engine), y, vcov_for(d, inf));
  return EstimateResult::make(f.coef(1), f.stderr_of(1), d.rows(), std::move(estimator), std::move(transform));
}

double arm_median(const Dataset& d, double arm) {
  std::vector<double> v;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.treatment()[i] == arm) v.push_back(d.outcome()[i]);
  }
  if (v.empty()) throw Error(ErrorKind::EmptyCell, arm == 1.0 ? "no treated rows" : "no control rows");
  std::sort(v.begin(), v.end());
  return left_quantile(v, 0.5);
}

}  // namespace

EstimateResult ate_pct_means(const Dataset& d, const InferenceOptions& inf) {
  d.require_binary_treatment();
  const FitResult f = ols_fit(DesignMatrix::with_constant(d.treatment(), "treatment"), d.outcome(), vcov_for(d, inf));
  double sum[2] = {0.0, 0.0};
  double count[2] = {0.0, 0.0};
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const int arm = d.treatment()[i] == 1.0;
    sum[arm] += d.outcome()[i];
    count[arm] += 1.0;
  }
  const double m0 = sum[0] / count[0];
  const double m1 = sum[1] / count[1];
  if (!(m0 > 0.0)) throw Error(ErrorKind::ZeroControlMean, "control mean is zero");
  // theta = b1 / b0 with (b0, b1) the regression coefficients
  const double b0 = f.coef(0), b1 = f.coef(1);
  Eigen::Vector2d grad(-b1 / (b0 * b0), 1.0 / b0);
  const double se = std::sqrt(std::max(0.0, grad.dot(f.vcov * grad)));
  auto r = EstimateResult::make((m1 - m0) / m0, se, d.rows(), "ate_pct_means", "identity");
  r.meta["control_mean"] = m0;
  r.meta["treated_mean"] = m1;
  return r;
}

double median_pct_value(const Dataset& d) {
  d.require_binary_treatment();
  const double m0 = arm_median(d, 0.0);
  if (!(m0 > 0.0)) throw Error(ErrorKind::ZeroControlMedian, "control median is zero");
  return (arm_median(d, 1.0) - m0) / m0;
}

EstimateResult median_pct(const Dataset& d, const BootstrapSpec& boot) {
  const double value = median_pct_value(d);
  const auto b = cluster_bootstrap(d, Statistic(median_pct_value), boot);
  auto r = EstimateResult::make(value, b[0].se, d.rows(), "median_pct", "identity");
  r.meta["control_median"] = arm_median(d, 0.0);
  r.meta["treated_median"] = arm_median(d, 1.0);
  r.meta["bootstrap_draws"] = static_cast<double>(b.draws);
  r.meta["bootstrap_failed"] = static_cast<double>(b.failed);
  r.meta["seed"] = static_cast<double>(b.seed);
  r.meta["ci_low"] = b[0].ci_low;
  r.meta["ci_high"] = b[0].ci_high;
  return r;
}

EstimateResult normalized_outcome_ate(const Dataset& d, std::size_t denominator, Engine engine,
                                      const InferenceOptions& inf) {
  d.require_binary_treatment();
  if (denominator >= d.covariate_count()) {
    throw Error(ErrorKind::MissingColumn, "denominator covariate index " + std::to_string(denominator) + " out of range");
  }
  const auto col = static_cast<Eigen::Index>(denominator);
  std::vector<double> ratio(d.rows());
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const double x = d.covariates()(static_cast<Eigen::Index>(i), col);
    if (!(x > 0.0)) {
      throw Error(ErrorKind::NonPositiveDenominator, "row " + std::to_string(i) + ": denominator '" +
                                                         d.covariate_names()[denominator] + "' is not positive");
    }
    ratio[i] = d.outcome()[i] / x;
  }
  DesignMatrix x = DesignMatrix::with_constant(d.treatment(), "treatment");
  if (engine == Engine::Covariates && d.covariate_count() > 1) {
    Eigen::MatrixXd rest(d.covariates().rows(), d.covariates().cols() - 1);
    std::vector<std::string> names;
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < d.covariates().cols(); ++j) {
      if (j == col) continue;
      rest.col(k++) = d.covariates().col(j);
      names.push_back(d.covariate_names()[static_cast<std::size_t>(j)]);
    }
    x = DesignMatrix::with_constant(d.treatment(), rest, names, "treatment");
  }
  const FitResult f = ols_fit(x, ratio, vcov_for(d, inf));
  auto r = EstimateResult::make(f.coef(1), f.stderr_of(1), d.rows(), "normalized_outcome_ate",
                                "ratio:" + d.covariate_names()[denominator]);
  return r;
}

EstimateResult rank_ate(const Dataset& d, std::optional<std::vector<double>> reference, Engine engine,
                        const InferenceOptions& inf) {
  d.require_binary_treatment();
  const bool pooled = !reference.has_value();
  if (pooled) {
    reference.emplace();
    for (std::size_t i = 0; i < d.rows(); ++i) {
      if (d.treatment()[i] == 0.0) reference->push_back(d.outcome()[i]);
    }
  }
  const Transform t = Transform::rank(std::move(*reference));
  auto r = treatment_effect(d, transform_column(d, t), engine, inf, "rank_ate", pooled ? "rank:pooled_control" : "rank:supplied");
  return r;
}

ThresholdProfile threshold_profile(const Dataset& d, const std::vector<double>& thresholds, Engine engine,
                                   const InferenceOptions& inf) {
  d.require_binary_treatment();
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) throw Error(ErrorKind::InvalidConfig, "thresholds must be strictly increasing");
  }
  ThresholdProfile p;
  p.thresholds = thresholds;
  const OlsSolver solver(treatment_design(d, engine), vcov_for(d, inf));
  for (double y : thresholds) {
    const Transform t = Transform::threshold(y);
    const FitResult f = solver.fit(transform_column(d, t));
    p.effects.push_back(EstimateResult::make(f.coef(1), f.stderr_of(1), d.rows(), "threshold", t.name()));
  }
  return p;
}

EstimateResult calibrated_ate(const Dataset& d, double x, bool did, Engine engine, const InferenceOptions& inf) {
  const double y_min = min_positive(d.outcome());
  const Transform t = Transform::calibrated_log(x, y_min);
  const auto y = transform_column(d, t);
  EstimateResult r;
  if (did) {
    const FitResult f = ols_fit(did_design(d, engine == Engine::Covariates), y, vcov_for(d, inf));
    r = EstimateResult::make(f.coef(1), f.stderr_of(1), d.rows(), "calibrated_did", t.name());
  } else {
    d.require_binary_treatment();
    r = treatment_effect(d, y, engine, inf, "calibrated_ate", t.name());
  }
  r.meta["y_min"] = y_min;
  r.meta["x"] = x;
  return r;
}

}  // namespace zeroeff
