#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/estimate.hpp"
#include "zeroeff/regression.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace zeroeff {

struct PoissonOptions {
  int max_iterations = 100;
  double deviance_tolerance = 1e-10;  // relative change
  double score_tolerance = 1e-8;      // sup-norm / (n * mean(y))
  double separation_bound = 30.0;     // |beta_j| for non-intercept j
  double init_epsilon = 1e-8;
};

/// Poisson QMLE fit of E[y|x] = exp(x'b) with a sandwich covariance.
struct PoissonFit {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd se;
  std::vector<std::string> names;
  std::vector<double> deviance_trace;  // one entry per accepted iterate, starting at the initial value
  bool converged = false;
  int iterations = 0;
  std::size_t n = 0;
  std::size_t cluster_count = 0;

  double coef(std::size_t j) const { return coefficients(static_cast<Eigen::Index>(j)); }
  double stderr_of(std::size_t j) const { return se(static_cast<Eigen::Index>(j)); }
  /// Sup-norm of sum_i x_i (y_i - exp(x_i'b)) at the returned coefficients.
  double score_norm = 0.0;
};

/// Iteratively reweighted least squares with step halving.
PoissonFit poisson_fit(const DesignMatrix& x, std::span<const double> y, const VcovSpec& vcov = {},
                       const PoissonOptions& opts = {});

/// exp(b_j) - 1 with delta-method standard error exp(b_j) * se(b_j).
struct PropEffect {
  double value = 0.0;
  double se = 0.0;
  std::size_t index = 0;
  double beta = 0.0;
  double beta_se = 0.0;
  /// exp(b +- 1.96 se) - 1; filled only on request.
  double ci_low = 0.0;
  double ci_high = 0.0;
  int relative_time = 0;  // event-study period, 0 elsewhere
};

PropEffect prop_effect(const PoissonFit& fit, std::size_t j, bool log_scale_ci = false);

/// Fits y = exp(b0 + b1 D [+ X'b2]) and returns exp(b1) - 1.
PropEffect ate_pct_poisson(const Dataset& d, bool covariates, const InferenceOptions& inf = {},
                           const PoissonOptions& opts = {});

/// Cell means m_{g,t} for group g, period t of a 2x2 design.
struct DidCells {
  double treated_pre = 0.0;
  double treated_post = 0.0;
  double control_pre = 0.0;
  double control_post = 0.0;
};
DidCells did_cell_means(const Dataset& d);

/// exp(b1) - 1 from y = exp(b0 + b1 G*Post + b2 G + b3 Post [+ X'b4]).
PropEffect att_pct_did(const Dataset& d, bool covariates, const InferenceOptions& inf = {},
                       const PoissonOptions& opts = {});

/// Event-study exponentiated coefficients, one per relative time other than
/// the reference period, ordered by relative time. Uses the group column
/// as D when present, otherwise the treatment column.
std::vector<PropEffect> poisson_event_study(const Dataset& d, std::span<const int> relative_time,
                                            int reference_period = -1, const InferenceOptions& inf = {},
                                            const PoissonOptions& opts = {});

}  // namespace zeroeff
