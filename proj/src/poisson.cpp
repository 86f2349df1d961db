#include "zeroeff/poisson.hpp"

#include "zeroeff/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace zeroeff {

namespace {

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
  double dev = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double yi = y(i);
    const double mi = mu(i);
    dev += (yi > 0.0 ? yi * std::log(yi / mi) : 0.0) - (yi - mi);
  }
  return 2.0 * dev;
}

bool mean_finite(const Eigen::VectorXd& eta) {
  // exp overflows near 709.78
  return eta.allFinite() && eta.maxCoeff() < 700.0;
}

}  // namespace

PoissonFit poisson_fit(const DesignMatrix& x, std::span<const double> y_in, const VcovSpec& vcov,
                       const PoissonOptions& opts) {
  const Eigen::MatrixXd& X = x.matrix();
  const Eigen::Index n = X.rows();
  const Eigen::Index J = X.cols();
  if (static_cast<Eigen::Index>(y_in.size()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "outcome length differs from design rows");
  }
  const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(y_in.data(), n);
  if (!y.allFinite()) throw Error(ErrorKind::NonFiniteInput, "outcome contains non-finite values");
  if ((y.array() < 0.0).any()) throw Error(ErrorKind::NegativeOutcome, "Poisson QMLE needs y >= 0");
  const double ybar = y.mean();
  if (!(ybar > 0.0)) throw Error(ErrorKind::AllZeroOutcome, "all outcomes are zero");
  check_full_rank(X, "poisson design");

  Eigen::VectorXd beta = Eigen::VectorXd::Zero(J);
  beta(0) = std::log(ybar + opts.init_epsilon);

  Eigen::VectorXd eta = X * beta;
  Eigen::VectorXd mu = eta.array().exp();
  double dev = poisson_deviance(y, mu);

  PoissonFit fit;
  fit.deviance_trace.push_back(dev);
  const double score_scale = static_cast<double>(n) * ybar;

  auto score_norm = [&](const Eigen::VectorXd& m) { return (X.transpose() * (y - m)).cwiseAbs().maxCoeff(); };
  auto check_separation = [&](const Eigen::VectorXd& b) {
    for (Eigen::Index j = 1; j < J; ++j) {
      if (!(std::abs(b(j)) <= opts.separation_bound)) {
        throw Error(ErrorKind::Separation, "coefficient '" + x.names()[static_cast<std::size_t>(j)] +
                                               "' diverges; a regressor perfectly predicts zero outcomes");
      }
    }
  };

  auto newton_step = [&]() -> Eigen::VectorXd {
    // Weighted least squares on the working response.
    const Eigen::VectorXd sw = mu.array().sqrt();
    const Eigen::VectorXd z = eta.array() + (y - mu).array() / mu.array();
    const Eigen::MatrixXd Xw = X.array().colwise() * sw.array();
    const Eigen::VectorXd zw = z.array() * sw.array();
    return Xw.householderQr().solve(zw) - beta;
  };

  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::VectorXd step = newton_step();
    const double full_step = step.cwiseAbs().maxCoeff();

    // Halve the step until the deviance does not increase.
    Eigen::VectorXd cand = beta + step;
    Eigen::VectorXd cand_eta = X * cand;
    double cand_dev = std::numeric_limits<double>::infinity();
    for (int h = 0; h < 60; ++h) {
      if (mean_finite(cand_eta)) {
        const Eigen::VectorXd cand_mu = cand_eta.array().exp();
        cand_dev = poisson_deviance(y, cand_mu);
        if (cand_dev <= dev) break;
      }
      step *= 0.5;
      cand = beta + step;
      cand_eta = X * cand;
    }
    fit.iterations = it;
    if (!(cand_dev <= dev)) {
      // Deviance flat to rounding: at the numerical optimum.
      fit.converged = score_norm(mu) < opts.score_tolerance * score_scale * 1e3;
      break;
    }
    check_separation(cand);

    const double rel_change = std::abs(dev - cand_dev) / (std::abs(cand_dev) + 0.1 * ybar);
    beta = cand;
    eta = cand_eta;
    mu = eta.array().exp();
    dev = cand_dev;
    fit.deviance_trace.push_back(dev);

    // A diverging coefficient keeps taking unit Newton steps while the
    // deviance flattens, so the step size gates convergence too.
    const bool settled = full_step < 1e-4 * (1.0 + beta.cwiseAbs().maxCoeff());
    if (settled && (rel_change < opts.deviance_tolerance || score_norm(mu) < opts.score_tolerance * score_scale)) {
      fit.converged = true;
      break;
    }
  }

  if (fit.converged) {
    // Undamped Newton polish: quadratic convergence takes the coefficients
    // to machine precision where the deviance can no longer resolve progress.
    for (int k = 0; k < 3; ++k) {
      const Eigen::VectorXd cand = beta + newton_step();
      const Eigen::VectorXd cand_eta = X * cand;
      if (!mean_finite(cand_eta)) break;
      const Eigen::VectorXd cand_mu = cand_eta.array().exp();
      if (!(score_norm(cand_mu) < score_norm(mu))) break;
      beta = cand;
      eta = cand_eta;
      mu = cand_mu;
    }
  }
  if (!fit.converged) {
    throw Error(ErrorKind::NoConvergence,
                "IRLS did not converge in " + std::to_string(opts.max_iterations) + " iterations");
  }

  const Eigen::VectorXd sw = mu.array().sqrt();
  const Eigen::MatrixXd Xw = X.array().colwise() * sw.array();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(Xw);
  const Eigen::MatrixXd r = qr.matrixQR().topLeftCorner(J, J).triangularView<Eigen::Upper>();
  const Eigen::MatrixXd r_inv = r.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(J, J));
  const Eigen::MatrixXd bread = r_inv * r_inv.transpose();

  fit.coefficients = beta;
  fit.vcov = sandwich(bread, X, y - mu, vcov);
  fit.se = fit.vcov.diagonal().cwiseMax(0.0).cwiseSqrt();
  fit.names = x.names();
  fit.n = static_cast<std::size_t>(n);
  fit.cluster_count = vcov.kind == VcovKind::Cluster ? count_clusters(vcov.cluster) : 0;
  fit.score_norm = score_norm(mu);
  return fit;
}

PropEffect prop_effect(const PoissonFit& fit, std::size_t j, bool log_scale_ci) {
  PropEffect p;
  p.index = j;
  p.beta = fit.coef(j);
  p.beta_se = fit.stderr_of(j);
  p.value = std::expm1(p.beta);
  p.se = std::exp(p.beta) * p.beta_se;
  if (log_scale_ci) {
    p.ci_low = std::expm1(p.beta - 1.96 * p.beta_se);
    p.ci_high = std::expm1(p.beta + 1.96 * p.beta_se);
  }
  return p;
}

PropEffect ate_pct_poisson(const Dataset& d, bool covariates, const InferenceOptions& inf,
                           const PoissonOptions& opts) {
  d.require_binary_treatment();
  const DesignMatrix x = covariates ? DesignMatrix::with_constant(d.treatment(), d.covariates(),
                                                                  d.covariate_names(), "treatment")
                                    : DesignMatrix::with_constant(d.treatment(), "treatment");
  const PoissonFit fit = poisson_fit(x, d.outcome(), vcov_for(d, inf), opts);
  return prop_effect(fit, 1);
}

DidCells did_cell_means(const Dataset& d) {
  d.require_did_columns();
  double sum[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
  std::size_t count[2][2] = {{0, 0}, {0, 0}};
  const auto y = d.outcome();
  for (std::size_t i = 0; i < d.rows(); ++i) {
    const int g = d.group()[i] == 1.0 ? 1 : 0;
    const int t = d.post()[i] == 1.0 ? 1 : 0;
    sum[g][t] += y[i];
    ++count[g][t];
  }
  const char* label[2][2] = {{"control/pre", "control/post"}, {"treated/pre", "treated/post"}};
  for (int g = 0; g < 2; ++g) {
    for (int t = 0; t < 2; ++t) {
      if (count[g][t] == 0) throw Error(ErrorKind::EmptyCell, std::string("DiD cell ") + label[g][t] + " is empty");
      if (!(sum[g][t] > 0.0)) {
        throw Error(ErrorKind::ZeroCellMean, std::string("DiD cell ") + label[g][t] + " has zero mean outcome");
      }
    }
  }
  DidCells c;
  c.treated_pre = sum[1][0] / static_cast<double>(count[1][0]);
  c.treated_post = sum[1][1] / static_cast<double>(count[1][1]);
  c.control_pre = sum[0][0] / static_cast<double>(count[0][0]);
  c.control_post = sum[0][1] / static_cast<double>(count[0][1]);
  return c;
}

PropEffect att_pct_did(const Dataset& d, bool covariates, const InferenceOptions& inf, const PoissonOptions& opts) {
  did_cell_means(d);  // validates cells
  const PoissonFit fit = poisson_fit(did_design(d, covariates), d.outcome(), vcov_for(d, inf), opts);
  return prop_effect(fit, 1);
}

std::vector<PropEffect> poisson_event_study(const Dataset& d, std::span<const int> relative_time,
                                            int reference_period, const InferenceOptions& inf,
                                            const PoissonOptions& opts) {
  const std::size_t n = d.rows();
  if (relative_time.size() != n) throw Error(ErrorKind::DimensionMismatch, "relative_time length mismatch");
  const std::span<const double> D = d.has_group() ? d.group() : d.treatment();
  for (double v : D) {
    if (v != 0.0 && v != 1.0) throw Error(ErrorKind::NonBinaryColumn, "event-study group indicator is not binary");
  }
  const std::set<int> periods(relative_time.begin(), relative_time.end());
  if (!periods.count(reference_period)) {
    throw Error(ErrorKind::CollinearPeriods, "reference period " + std::to_string(reference_period) + " not observed");
  }
  if (periods.size() < 2) throw Error(ErrorKind::CollinearPeriods, "event study needs at least two periods");

  std::vector<int> others;
  for (int r : periods) {
    if (r != reference_period) others.push_back(r);
  }
  const auto m = static_cast<Eigen::Index>(others.size());
  // Columns: const, D x [r] (m), lambda_r (m), D.
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), 2 + 2 * m);
  std::vector<std::string> names{"const"};
  for (int r : others) names.push_back("group_x_rel" + std::to_string(r));
  for (int r : others) names.push_back("period" + std::to_string(r));
  names.push_back("group");
  for (std::size_t i = 0; i < n; ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    X(row, 0) = 1.0;
    const auto pos = std::lower_bound(others.begin(), others.end(), relative_time[i]);
    if (pos != others.end() && *pos == relative_time[i]) {
      const auto k = static_cast<Eigen::Index>(pos - others.begin());
      X(row, 1 + k) = D[i];
      X(row, 1 + m + k) = 1.0;
    }
    X(row, 1 + 2 * m) = D[i];
  }
  PoissonFit fit;
  try {
    fit = poisson_fit(DesignMatrix(std::move(X), std::move(names)), d.outcome(), vcov_for(d, inf), opts);
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::RankDeficient) throw Error(ErrorKind::CollinearPeriods, e.what());
    throw;
  }
  std::vector<PropEffect> out;
  for (Eigen::Index k = 0; k < m; ++k) {
    PropEffect p = prop_effect(fit, static_cast<std::size_t>(1 + k));
    p.relative_time = others[static_cast<std::size_t>(k)];
    out.push_back(p);
  }
  return out;
}

}  // namespace zeroeff
