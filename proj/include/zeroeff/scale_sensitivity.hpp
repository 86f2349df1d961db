#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/estimate.hpp"
#include "zeroeff/transforms.hpp"

#include <optional>
#include <string>
#include <vector>

namespace zeroeff {

struct SensitivityOptions {
  Engine engine = Engine::DiffMeans;
  InferenceOptions inference;
  unsigned threads = 1;
};

/// OLS estimate of the treatment coefficient for m(a * Y). A transform that
/// already carries a scale s is evaluated at s * a.
EstimateResult theta_at(const Dataset& d, const Transform& t, double a, const SensitivityOptions& opts = {});

/// Same regression with IndicatorPositive as outcome: the extensive margin.
EstimateResult extensive_margin(const Dataset& d, const SensitivityOptions& opts = {});

struct SensitivityCurve {
  std::vector<double> grid;
  std::vector<double> theta;
  std::vector<double> se;
  std::vector<double> tstat;
  std::vector<double> approx;  // theta(a0) + gamma * log(a / a0)
  double anchor = 1.0;         // a0
  EstimateResult extensive_margin;
  TransformKind transform_kind = TransformKind::Arcsinh;
  std::string transform_name;
};

/// 25 log-spaced points over [1e-4, 1e8].
std::vector<double> default_grid();
std::vector<double> log_grid(double lo, double hi, std::size_t points);

SensitivityCurve sensitivity_curve(const Dataset& d, const Transform& t, const std::vector<double>& grid,
                                   const SensitivityOptions& opts = {});

/// Least-squares slope of theta on log(a) over grid points inside [lo, hi].
double log_slope(const SensitivityCurve& c, double lo, double hi);

struct ScaleSearch {
  double a = 1.0;
  double theta = 0.0;
  int bracket_steps = 0;
  int bisection_steps = 0;
};

struct SearchOptions {
  double tolerance = 1e-6;
  int max_bisections = 200;
  double zero_margin = 1e-10;  // |gamma| below this counts as no extensive margin
};

/// Finds a with | |theta(a)| - target | < tolerance by geometric bracketing
/// from a = 1 and bisection in log(a).
ScaleSearch find_scale_for_target(const Dataset& d, const Transform& t, double target,
                                  const SensitivityOptions& opts = {}, const SearchOptions& search = {});

struct TstatRow {
  double a = 0.0;
  double t_theta = 0.0;
  double t_gamma = 0.0;
};

struct TstatTable {
  std::vector<TstatRow> rows;
  double t_gamma = 0.0;
  bool convergence_expected = true;  // false when gamma is zero
};

TstatTable tstat_table(const Dataset& d, const Transform& t, const std::vector<double>& grid,
                       const SensitivityOptions& opts = {});

/// Rescale-by-100 summary: theta(1), theta(100), gamma, raw change and
/// 100 * change / theta(1) (signed).
struct RescaleSummary {
  double theta_1 = 0.0;
  double theta_100 = 0.0;
  double gamma = 0.0;
  double raw_change = 0.0;
  double pct_change = 0.0;
  double predicted_change = 0.0;  // gamma * log(100)
};

RescaleSummary rescale_summary(const Dataset& d, const Transform& t, const SensitivityOptions& opts = {});

/// Columns a, theta, se, tstat, approx.
std::string curve_csv(const SensitivityCurve& c);
std::string curve_json(const SensitivityCurve& c);

}  // namespace zeroeff
