#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace zeroeff {

/// n x J regressor matrix whose first column is the constant 1.
class DesignMatrix {
 public:
  /// Throws DimensionMismatch if empty or the first column is not all ones.
  DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> names = {});

  /// [1, d] for a single regressor.
  static DesignMatrix with_constant(std::span<const double> d, const std::string& name = "d");
  /// [1, d, covariates...].
  static DesignMatrix with_constant(std::span<const double> d, const Eigen::MatrixXd& covariates,
                                    const std::vector<std::string>& covariate_names, const std::string& name = "d");
  /// Constant only.
  static DesignMatrix constant_only(std::size_t n);

  const Eigen::MatrixXd& matrix() const { return x_; }
  const std::vector<std::string>& names() const { return names_; }
  Eigen::Index rows() const { return x_.rows(); }
  Eigen::Index cols() const { return x_.cols(); }

 private:
  Eigen::MatrixXd x_;
  std::vector<std::string> names_;
};

enum class VcovKind { HC0, Cluster };

/// HC0 or cluster-robust meat. `small_sample` applies n/(n-J) to HC0 and
/// G/(G-1) to the cluster sandwich; off by default.
struct VcovSpec {
  VcovKind kind = VcovKind::HC0;
  std::vector<int> cluster;
  bool small_sample = false;

  static VcovSpec hc0() { return {}; }
  static VcovSpec clustered(std::span<const int> ids, bool small_sample = false) {
    return {VcovKind::Cluster, std::vector<int>(ids.begin(), ids.end()), small_sample};
  }
};

struct FitResult {
  Eigen::VectorXd coefficients;
  Eigen::MatrixXd vcov;
  Eigen::VectorXd residuals;
  Eigen::VectorXd se;
  Eigen::VectorXd tstats;
  std::vector<std::string> names;
  std::size_t n = 0;
  std::size_t J = 0;
  std::size_t cluster_count = 0;

  double coef(std::size_t j) const { return coefficients(static_cast<Eigen::Index>(j)); }
  double stderr_of(std::size_t j) const { return se(static_cast<Eigen::Index>(j)); }
  double tstat(std::size_t j) const { return tstats(static_cast<Eigen::Index>(j)); }
};

/// Cached QR factorisation of a design; repeated fits against new outcomes
/// reuse the factorisation and the bread of the sandwich.
class OlsSolver {
 public:
  OlsSolver(const DesignMatrix& x, VcovSpec vcov);

  FitResult fit(std::span<const double> y) const;
  FitResult fit(const Eigen::VectorXd& y) const;

  /// Row j of (X'X)^{-1} X': coefficient j equals weights.dot(y).
  Eigen::VectorXd coefficient_weights(std::size_t j) const;

  const DesignMatrix& design() const { return x_; }

 private:
  friend class TslsSolver;
  Eigen::VectorXd solve(const Eigen::VectorXd& y) const;

  DesignMatrix x_;
  VcovSpec vcov_;
  Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
  Eigen::MatrixXd r_inv_;  // J x J, inverse of the triangular factor
  Eigen::MatrixXd bread_;  // (X'X)^{-1}
  std::size_t clusters_ = 0;
};

FitResult ols_fit(const DesignMatrix& x, std::span<const double> y, const VcovSpec& vcov = {});

/// Sandwich covariance bread * meat * bread for scores x_i * e_i.
Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& x, const Eigen::VectorXd& e,
                         const VcovSpec& vcov);

/// Throws RankDeficient when the smallest singular value of X falls below
/// 1e-10 times the largest.
void check_full_rank(const Eigen::MatrixXd& x, const std::string& what);

std::size_t count_clusters(std::span<const int> ids);

struct TslsResult : FitResult {
  double first_stage_coef = 0.0;
  double first_stage_se = 0.0;
  double first_stage_t = 0.0;
  double first_stage_f = 0.0;
  bool weak_first_stage = false;  // |first-stage t| < 2
};

/// Just-identified two-stage least squares: one endogenous regressor d
/// (appended as the last coefficient) instrumented by one column z.
class TslsSolver {
 public:
  TslsSolver(const DesignMatrix& exog, std::span<const double> d, std::span<const double> z, VcovSpec vcov);

  TslsResult fit(std::span<const double> y) const;
  /// Weights w with coefficient on d = w.dot(y).
  Eigen::VectorXd endogenous_weights() const;

  double first_stage_t() const { return first_stage_.tstat(first_stage_.J - 1); }
  bool weak_first_stage() const { return std::abs(first_stage_t()) < 2.0; }
  const FitResult& first_stage() const { return first_stage_; }

 private:
  Eigen::MatrixXd x_;  // [exog, d]
  std::vector<std::string> names_;
  VcovSpec vcov_;
  FitResult first_stage_;
  OlsSolver projected_;  // OLS on P_Z X
};

TslsResult tsls_fit(const DesignMatrix& exog, std::span<const double> d, std::span<const double> z,
                    std::span<const double> y, const VcovSpec& vcov = {});

}  // namespace zeroeff
