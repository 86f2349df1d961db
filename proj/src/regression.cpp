#include "zeroeff/regression.hpp"

#include "zeroeff/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

namespace zeroeff {

namespace {

constexpr double kRankTolerance = 1e-10;

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> v) {
  return {v.data(), static_cast<Eigen::Index>(v.size())};
}

void fill_se(FitResult& r) {
  const Eigen::Index J = r.coefficients.size();
  r.se.resize(J);
  r.tstats.resize(J);
  for (Eigen::Index j = 0; j < J; ++j) {
    const double v = r.vcov(j, j);
    r.se(j) = v > 0.0 ? std::sqrt(v) : 0.0;
    r.tstats(j) = r.se(j) > 0.0 ? r.coefficients(j) / r.se(j) : std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// DesignMatrix
// ---------------------------------------------------------------------------

DesignMatrix::DesignMatrix(Eigen::MatrixXd x, std::vector<std::string> names)
    : x_(std::move(x)), names_(std::move(names)) {
  if (x_.rows() == 0 || x_.cols() == 0) throw Error(ErrorKind::DimensionMismatch, "design matrix is empty");
  if (!(x_.col(0).array() == 1.0).all()) {
    throw Error(ErrorKind::DimensionMismatch, "first design column must be the constant 1");
  }
  if (!x_.allFinite()) throw Error(ErrorKind::NonFiniteInput, "design matrix contains non-finite values");
  if (names_.empty()) {
    names_.push_back("const");
    for (Eigen::Index j = 1; j < x_.cols(); ++j) names_.push_back("x" + std::to_string(j));
  }
  if (names_.size() != static_cast<std::size_t>(x_.cols())) {
    throw Error(ErrorKind::DimensionMismatch, "design column names do not match column count");
  }
}

DesignMatrix DesignMatrix::with_constant(std::span<const double> d, const std::string& name) {
  return with_constant(d, Eigen::MatrixXd(static_cast<Eigen::Index>(d.size()), 0), {}, name);
}

DesignMatrix DesignMatrix::with_constant(std::span<const double> d, const Eigen::MatrixXd& covariates,
                                         const std::vector<std::string>& covariate_names,
                                         const std::string& name) {
  const auto n = static_cast<Eigen::Index>(d.size());
  if (covariates.rows() != n) throw Error(ErrorKind::DimensionMismatch, "covariates row count mismatch");
  Eigen::MatrixXd x(n, 2 + covariates.cols());
  x.col(0).setOnes();
  x.col(1) = as_vector(d);
  if (covariates.cols() > 0) x.rightCols(covariates.cols()) = covariates;
  std::vector<std::string> names{"const", name};
  for (Eigen::Index j = 0; j < covariates.cols(); ++j) {
    const auto k = static_cast<std::size_t>(j);
    names.push_back(k < covariate_names.size() ? covariate_names[k] : "x" + std::to_string(j));
  }
  return DesignMatrix(std::move(x), std::move(names));
}

DesignMatrix DesignMatrix::constant_only(std::size_t n) {
  return DesignMatrix(Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1), {"const"});
}

// ---------------------------------------------------------------------------
// Sandwich pieces
// ---------------------------------------------------------------------------

void check_full_rank(const Eigen::MatrixXd& x, const std::string& what) {
  if (x.rows() < x.cols()) {
    throw Error(ErrorKind::RankDeficient, what + ": fewer rows than columns");
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(x);
  const Eigen::MatrixXd r = qr.matrixQR().topRows(x.cols()).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s(0) > 0.0) || s(s.size() - 1) < kRankTolerance * s(0)) {
    throw Error(ErrorKind::RankDeficient, what + ": design is rank deficient");
  }
}

std::size_t count_clusters(std::span<const int> ids) {
  std::vector<int> v(ids.begin(), ids.end());
  std::sort(v.begin(), v.end());
  return static_cast<std::size_t>(std::unique(v.begin(), v.end()) - v.begin());
}

Eigen::MatrixXd sandwich(const Eigen::MatrixXd& bread, const Eigen::MatrixXd& x, const Eigen::VectorXd& e,
                         const VcovSpec& vcov) {
  const Eigen::Index n = x.rows();
  const Eigen::Index J = x.cols();
  Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(J, J);
  double factor = 1.0;
  if (vcov.kind == VcovKind::HC0) {
    const Eigen::MatrixXd scores = x.array().colwise() * e.array();
    meat.noalias() = scores.transpose() * scores;
    if (vcov.small_sample && n > J) factor = static_cast<double>(n) / static_cast<double>(n - J);
  } else {
    if (static_cast<Eigen::Index>(vcov.cluster.size()) != n) {
      throw Error(ErrorKind::DimensionMismatch, "cluster ids do not cover every row");
    }
    // Dense relabel in order of first appearance so summation order is fixed.
    std::unordered_map<int, Eigen::Index> slot;
    std::vector<Eigen::Index> label(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      auto [it, inserted] = slot.try_emplace(vcov.cluster[static_cast<std::size_t>(i)],
                                             static_cast<Eigen::Index>(slot.size()));
      label[static_cast<std::size_t>(i)] = it->second;
    }
    const auto G = static_cast<Eigen::Index>(slot.size());
    if (G < 2) throw Error(ErrorKind::TooFewClusters, "cluster-robust variance needs at least 2 clusters");
    Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(G, J);
    for (Eigen::Index i = 0; i < n; ++i) sums.row(label[static_cast<std::size_t>(i)]) += x.row(i) * e(i);
    meat.noalias() = sums.transpose() * sums;
    if (vcov.small_sample) factor = static_cast<double>(G) / static_cast<double>(G - 1);
  }
  Eigen::MatrixXd v = factor * (bread * meat * bread);
  return 0.5 * (v + v.transpose());
}

// ---------------------------------------------------------------------------
// OLS
// ---------------------------------------------------------------------------

OlsSolver::OlsSolver(const DesignMatrix& x, VcovSpec vcov) : x_(x), vcov_(std::move(vcov)) {
  const auto& m = x_.matrix();
  if (m.rows() < m.cols()) throw Error(ErrorKind::RankDeficient, "fewer rows than regressors");
  if (vcov_.kind == VcovKind::Cluster) {
    if (static_cast<Eigen::Index>(vcov_.cluster.size()) != m.rows()) {
      throw Error(ErrorKind::DimensionMismatch, "cluster ids do not cover every row");
    }
    clusters_ = count_clusters(vcov_.cluster);
    if (clusters_ < 2) throw Error(ErrorKind::TooFewClusters, "cluster-robust variance needs at least 2 clusters");
  }
  qr_.compute(m);
  const Eigen::Index J = m.cols();
  const Eigen::MatrixXd r = qr_.matrixQR().topRows(J).triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r);
  const auto& s = svd.singularValues();
  if (!(s(0) > 0.0) || s(J - 1) < kRankTolerance * s(0)) {
    throw Error(ErrorKind::RankDeficient, "design is rank deficient");
  }
  r_inv_ = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(J, J));
  bread_ = r_inv_ * r_inv_.transpose();
}

Eigen::VectorXd OlsSolver::solve(const Eigen::VectorXd& y) const {
  const Eigen::Index J = x_.cols();
  Eigen::VectorXd qty = qr_.householderQ().adjoint() * y;
  return qr_.matrixQR().topLeftCorner(J, J).triangularView<Eigen::Upper>().solve(qty.head(J));
}

FitResult OlsSolver::fit(std::span<const double> y) const { return fit(Eigen::VectorXd(as_vector(y))); }

FitResult OlsSolver::fit(const Eigen::VectorXd& y) const {
  const auto& m = x_.matrix();
  if (y.size() != m.rows()) throw Error(ErrorKind::DimensionMismatch, "outcome length differs from design rows");
  if (!y.allFinite()) throw Error(ErrorKind::NonFiniteInput, "outcome contains non-finite values");
  FitResult r;
  r.coefficients = solve(y);
  r.residuals = y - m * r.coefficients;
  r.vcov = sandwich(bread_, m, r.residuals, vcov_);
  r.names = x_.names();
  r.n = static_cast<std::size_t>(m.rows());
  r.J = static_cast<std::size_t>(m.cols());
  r.cluster_count = clusters_;
  fill_se(r);
  return r;
}

Eigen::VectorXd OlsSolver::coefficient_weights(std::size_t j) const {
  // (X'X)^{-1} X' = R^{-1} Q1'; row j is Q1 * (row j of R^{-1})'.
  const Eigen::Index n = x_.rows();
  const Eigen::Index J = x_.cols();
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(n);
  padded.head(J) = r_inv_.row(static_cast<Eigen::Index>(j)).transpose();
  return qr_.householderQ() * padded;
}

FitResult ols_fit(const DesignMatrix& x, std::span<const double> y, const VcovSpec& vcov) {
  return OlsSolver(x, vcov).fit(y);
}

// ---------------------------------------------------------------------------
// TSLS
// ---------------------------------------------------------------------------

namespace {

Eigen::MatrixXd stack_columns(const Eigen::MatrixXd& left, std::span<const double> col) {
  if (static_cast<Eigen::Index>(col.size()) != left.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "column length differs from design rows");
  }
  Eigen::MatrixXd out(left.rows(), left.cols() + 1);
  out.leftCols(left.cols()) = left;
  out.col(left.cols()) = as_vector(col);
  return out;
}

std::vector<std::string> append_name(std::vector<std::string> names, std::string extra) {
  names.push_back(std::move(extra));
  return names;
}

// Exogenous columns lie in the instrument space, so only d is projected.
DesignMatrix projected_design(const DesignMatrix& exog, const FitResult& first_stage, const Eigen::MatrixXd& z_full) {
  Eigen::MatrixXd xhat(exog.rows(), exog.cols() + 1);
  xhat.leftCols(exog.cols()) = exog.matrix();
  xhat.col(exog.cols()) = z_full * first_stage.coefficients;
  return DesignMatrix(std::move(xhat), append_name(exog.names(), "d"));
}

}  // namespace

TslsSolver::TslsSolver(const DesignMatrix& exog, std::span<const double> d, std::span<const double> z,
                       VcovSpec vcov)
    : x_(stack_columns(exog.matrix(), d)),
      names_(append_name(exog.names(), "d")),
      vcov_(std::move(vcov)),
      first_stage_(OlsSolver(DesignMatrix(stack_columns(exog.matrix(), z), append_name(exog.names(), "z")), vcov_)
                       .fit(d)),
      projected_(projected_design(exog, first_stage_, stack_columns(exog.matrix(), z)), vcov_) {
  check_full_rank(x_, "tsls structural design");
}

TslsResult TslsSolver::fit(std::span<const double> y) const {
  if (static_cast<Eigen::Index>(y.size()) != x_.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "outcome length differs from design rows");
  }
  const Eigen::VectorXd yv = as_vector(y);
  if (!yv.allFinite()) throw Error(ErrorKind::NonFiniteInput, "outcome contains non-finite values");
  TslsResult r;
  r.coefficients = projected_.solve(yv);
  r.residuals = yv - x_ * r.coefficients;
  r.vcov = sandwich(projected_.bread_, projected_.design().matrix(), r.residuals, vcov_);
  r.names = names_;
  r.n = static_cast<std::size_t>(x_.rows());
  r.J = static_cast<std::size_t>(x_.cols());
  r.cluster_count = projected_.clusters_;
  fill_se(r);
  const std::size_t last = first_stage_.J - 1;
  r.first_stage_coef = first_stage_.coef(last);
  r.first_stage_se = first_stage_.stderr_of(last);
  r.first_stage_t = first_stage_.tstat(last);
  r.first_stage_f = r.first_stage_t * r.first_stage_t;
  r.weak_first_stage = !(std::abs(r.first_stage_t) >= 2.0);
  return r;
}

Eigen::VectorXd TslsSolver::endogenous_weights() const {
  return projected_.coefficient_weights(static_cast<std::size_t>(x_.cols() - 1));
}

TslsResult tsls_fit(const DesignMatrix& exog, std::span<const double> d, std::span<const double> z,
                    std::span<const double> y, const VcovSpec& vcov) {
  return TslsSolver(exog, d, z, vcov).fit(y);
}

}  // namespace zeroeff
