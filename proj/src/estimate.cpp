#include "zeroeff/estimate.hpp"

#include "zeroeff/error.hpp"

#include <cmath>
#include <limits>

namespace zeroeff {

EstimateResult EstimateResult::make(double value, double se, std::size_t n, std::string estimator,
                                    std::string transform) {
  EstimateResult r;
  r.value = value;
  r.se = se;
  r.tstat = se > 0.0 ? value / se : std::numeric_limits<double>::quiet_NaN();
  r.n = n;
  r.estimator = std::move(estimator);
  r.transform = std::move(transform);
  return r;
}

VcovSpec vcov_for(const Dataset& d, const InferenceOptions& opts) {
  if (opts.cluster && d.has_cluster()) return VcovSpec::clustered(d.cluster(), opts.small_sample);
  VcovSpec v;
  v.small_sample = opts.small_sample;
  return v;
}

std::string to_string(Engine e) { return e == Engine::DiffMeans ? "ols_diff_means" : "ols_with_covariates"; }

Engine parse_engine(const std::string& s) {
  if (s == "ols_diff_means" || s == "diff_means") return Engine::DiffMeans;
  if (s == "ols_with_covariates" || s == "covariates") return Engine::Covariates;
  throw Error(ErrorKind::InvalidConfig, "unknown engine '" + s + "'");
}

DesignMatrix treatment_design(const Dataset& d, Engine e) {
  if (e == Engine::Covariates && d.covariate_count() > 0) {
    return DesignMatrix::with_constant(d.treatment(), d.covariates(), d.covariate_names(), "treatment");
  }
  return DesignMatrix::with_constant(d.treatment(), "treatment");
}

DesignMatrix did_design(const Dataset& d, bool covariates) {
  d.require_did_columns();
  const auto n = static_cast<Eigen::Index>(d.rows());
  const Eigen::Index k = covariates ? static_cast<Eigen::Index>(d.covariate_count()) : 0;
  Eigen::MatrixXd x(n, 4 + k);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = d.group()[static_cast<std::size_t>(i)];
    const double t = d.post()[static_cast<std::size_t>(i)];
    x(i, 0) = 1.0;
    x(i, 1) = g * t;
    x(i, 2) = g;
    x(i, 3) = t;
  }
  std::vector<std::string> names{"const", "group_x_post", "group", "post"};
  if (k > 0) {
    x.rightCols(k) = d.covariates();
    names.insert(names.end(), d.covariate_names().begin(), d.covariate_names().end());
  }
  return DesignMatrix(std::move(x), std::move(names));
}

}  // namespace zeroeff
