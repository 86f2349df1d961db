#pragma once

#include "zeroeff/bounds.hpp"
#include "zeroeff/dataset.hpp"
#include "zeroeff/transforms.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zeroeff {

struct DiscreteMarginals {
  std::vector<double> support1, probs1;
  std::vector<double> support0, probs0;

  /// Throws InfeasibleMarginals.
  void validate() const;
  bool has_zero() const;
};

/// Arm-wise empirical distributions of the outcome.
DiscreteMarginals empirical_marginals(const Dataset& d);

struct DiscreteJoint {
  std::vector<double> support1, support0;
  Eigen::MatrixXd pi;  // rows support1, columns support0

  DiscreteMarginals marginals() const;
};

enum class GKind { LogRatio, PctChange, TransformDifference, IndicatorBothPositive, Custom };

class GFunction {
 public:
  static GFunction log_ratio();
  static GFunction pct_change();
  static GFunction transform_difference(Transform m);
  static GFunction indicator_both_positive();
  /// Values keyed by (y1, y0); lookups off the table are NaN.
  static GFunction custom(std::map<std::pair<double, double>, double> table, std::string name = "custom");

  /// NaN where undefined.
  double operator()(double y1, double y0) const;
  GKind kind() const { return kind_; }
  std::string name() const;

 private:
  explicit GFunction(GKind k) : kind_(k) {}
  GKind kind_;
  std::optional<Transform> m_;
  std::map<std::pair<double, double>, double> table_;
  std::string name_;
};

/// "log_ratio", "pct_change", "both_positive", "diff:<transform>".
GFunction parse_gfunction(const std::string& s);

/// Minimise sum pi_ij c_ij over couplings of supply and demand.
struct TransportSolution {
  double value = 0.0;
  Eigen::MatrixXd flow;
  std::size_t pivots = 0;
};
TransportSolution solve_transport(const std::vector<double>& supply, const std::vector<double>& demand,
                                  const Eigen::MatrixXd& cost);

struct CouplingRange {
  double min = 0.0, max = 0.0;
  DiscreteJoint argmin, argmax;
  bool point_identified = false;  // width < 1e-9 (|min| + |max| + 1)
};

inline constexpr std::size_t kMaxSupport = 200;

CouplingRange coupling_range(const DiscreteMarginals& m, const GFunction& g);

struct IdentityTest {
  bool holds = true;
  double worst_violation = 0.0;
  std::vector<double> witness;  // (y1, y0, a, b) or (y1, y0, a)
};

IdentityTest separability_test(const GFunction& g, const std::vector<double>& grid);
IdentityTest scale_invariance_test(const GFunction& g, const std::vector<double>& grid,
                                   const std::vector<double>& scales);

struct TrilemmaReport {
  std::string g_name;
  bool zeros_in_support = false;
  bool averaged_form = false;  // finite, non-constant, weakly increasing in y1 on the support
  IdentityTest scale;
  CouplingRange range;
  bool range_computed = false;
  bool all_three = false;
  bool contradiction = false;  // all three with zeros in the support
  std::optional<double> log_c, log_d, log_residual;
};

TrilemmaReport trilemma_report(const DiscreteMarginals& m, const GFunction& g);
std::string trilemma_json(const TrilemmaReport& r);

struct TwoPart {
  double tau_a = 0.0, tau_b = 0.0, intensive = 0.0, alpha = 0.0, selection = 0.0;
  double identity_residual = 0.0;  // tau_b - (intensive + alpha selection)
};

/// Throws MonotonicityCellViolated if P(Y1 = 0, Y0 > 0) > 0.
TwoPart two_part_decomposition(const DiscreteJoint& j);

/// Feasible coupling from a positive matrix scaled to the marginals.
DiscreteJoint sinkhorn_coupling(const DiscreteMarginals& m, std::uint64_t seed, std::uint64_t stream = 0);

/// Brute-force Lee bounds: extremes of E[m(Y1) - m(Y0) | both positive] over
/// couplings satisfying monotonicity in the direction of the margin.
std::pair<double, double> lee_bounds_lp(const DiscreteMarginals& m, OutcomeScale scale);

/// CSV with columns arm,value,prob.
DiscreteMarginals parse_marginals_csv(const std::string& text);
/// CSV with columns y1,y0,g.
GFunction parse_gtable_csv(const std::string& text);

}  // namespace zeroeff
