#include "doctest.h"

#include "zeroeff/error.hpp"
#include "zeroeff/regression.hpp"
#include "zeroeff/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

using namespace zeroeff;

namespace {

double mean_where(const std::vector<double>& y, const std::vector<double>& d, double v) {
  double s = 0.0;
  int n = 0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (d[i] == v) {
      s += y[i];
      ++n;
    }
  }
  return s / n;
}

}  // namespace

TEST_CASE("ols on a saturated binary design returns the difference in means") {
  std::mt19937_64 rng(1);
  std::lognormal_distribution<double> ln(0.0, 1.0);
  std::vector<double> y, d;
  for (int i = 0; i < 200; ++i) {
    d.push_back(i % 3 == 0 ? 1.0 : 0.0);
    y.push_back(ln(rng) * (1.0 + d.back()));
  }
  const auto fit = ols_fit(DesignMatrix::with_constant(d), y);
  CHECK(fit.coef(1) == doctest::Approx(mean_where(y, d, 1) - mean_where(y, d, 0)).epsilon(1e-12));
  CHECK(fit.coef(0) == doctest::Approx(mean_where(y, d, 0)).epsilon(1e-12));

  // residual orthogonality
  const Eigen::VectorXd xe = DesignMatrix::with_constant(d).matrix().transpose() * fit.residuals;
  const double ynorm = Eigen::Map<const Eigen::VectorXd>(y.data(), 200).norm();
  CHECK(xe.cwiseAbs().maxCoeff() < 1e-10 * ynorm);
  // FitResult invariants
  CHECK((fit.vcov - fit.vcov.transpose()).cwiseAbs().maxCoeff() == 0.0);
  CHECK(fit.vcov.selfadjointView<Eigen::Lower>().ldlt().vectorD().minCoeff() >= -1e-14);
  CHECK(fit.tstat(1) == doctest::Approx(fit.coef(1) / fit.stderr_of(1)));
}

TEST_CASE("ols on a constant outcome") {
  Eigen::MatrixXd x(5, 3);
  x << 1, 0, 2.0, 1, 1, -1.0, 1, 0, 0.5, 1, 1, 3.0, 1, 0, 7.0;
  const std::vector<double> y(5, 5.0);
  const auto fit = ols_fit(DesignMatrix(x), y);
  CHECK(fit.coef(0) == doctest::Approx(5.0).epsilon(1e-13));
  CHECK(std::fabs(fit.coef(1)) < 1e-12);
  CHECK(std::fabs(fit.coef(2)) < 1e-12);
  CHECK(fit.residuals.cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("cluster-robust and HC0 sandwich match hand-computed values") {
  // Frozen from an independent explicit-inverse evaluation of the sandwich
  // (X'X)^{-1} (sum_g s_g s_g') (X'X)^{-1}, s_g = sum_{i in g} x_i e_i.
  const std::vector<double> y{1, 3, 2, 5, 4, 8};
  const std::vector<double> d{0, 1, 0, 1, 0, 1};
  const std::vector<int> g{0, 0, 1, 1, 2, 2};
  const auto cl = ols_fit(DesignMatrix::with_constant(d), y, VcovSpec::clustered(g));
  CHECK(cl.coef(0) == doctest::Approx(7.0 / 3.0).epsilon(1e-14));
  CHECK(cl.coef(1) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(cl.stderr_of(0) == doctest::Approx(0.7200822998230948).epsilon(1e-12));
  CHECK(cl.stderr_of(1) == doctest::Approx(0.47140452079102974).epsilon(1e-12));
  CHECK(cl.cluster_count == 3);

  const auto hc = ols_fit(DesignMatrix::with_constant(d), y);
  CHECK(hc.stderr_of(0) == doctest::Approx(0.7200822998230955).epsilon(1e-12));
  CHECK(hc.stderr_of(1) == doctest::Approx(1.387777332977422).epsilon(1e-12));

  // optional corrections
  const auto cl_ss = ols_fit(DesignMatrix::with_constant(d), y, VcovSpec::clustered(g, true));
  CHECK(cl_ss.stderr_of(1) == doctest::Approx(0.47140452079102974 * std::sqrt(3.0 / 2.0)).epsilon(1e-12));
  VcovSpec hc1;
  hc1.small_sample = true;
  const auto hc_ss = ols_fit(DesignMatrix::with_constant(d), y, hc1);
  CHECK(hc_ss.stderr_of(1) == doctest::Approx(1.387777332977422 * std::sqrt(6.0 / 4.0)).epsilon(1e-12));
}

TEST_CASE("ols errors") {
  const std::vector<double> y{1, 2, 3, 4};
  Eigen::MatrixXd x(4, 3);
  x << 1, 1, 2, 1, 2, 4, 1, 3, 6, 1, 4, 8;
  try {
    ols_fit(DesignMatrix(x), y);
    FAIL("expected RankDeficient");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::RankDeficient);
  }
  const std::vector<int> one{0, 0, 0, 0};
  try {
    ols_fit(DesignMatrix::with_constant(std::vector<double>{0, 1, 0, 1}), y, VcovSpec::clustered(one));
    FAIL("expected TooFewClusters");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TooFewClusters);
  }
  Eigen::MatrixXd bad(2, 2);
  bad << 2, 0, 1, 1;
  CHECK_THROWS_AS(DesignMatrix{bad}, Error);
}

TEST_CASE("tsls with binary instrument and no covariates is the Wald ratio") {
  std::mt19937_64 rng(5);
  std::bernoulli_distribution coin(0.5);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y, d, z;
  for (int i = 0; i < 500; ++i) {
    const double zi = coin(rng) ? 1.0 : 0.0;
    const double u = noise(rng);
    const double di = (0.3 + 0.4 * zi + 0.2 * u + 0.3 * noise(rng)) > 0.5 ? 1.0 : 0.0;
    z.push_back(zi);
    d.push_back(di);
    y.push_back(1.0 + 2.5 * di + u);
  }
  const auto fit = tsls_fit(DesignMatrix::constant_only(z.size()), d, z, y);
  const double wald = (mean_where(y, z, 1) - mean_where(y, z, 0)) / (mean_where(d, z, 1) - mean_where(d, z, 0));
  CHECK(fit.coef(1) == doctest::Approx(wald).epsilon(1e-11));
  CHECK(fit.first_stage_f == doctest::Approx(fit.first_stage_t * fit.first_stage_t));
  CHECK_FALSE(fit.weak_first_stage);

  // endogenous weights reproduce the coefficient
  TslsSolver solver(DesignMatrix::constant_only(z.size()), d, z, {});
  const Eigen::VectorXd w = solver.endogenous_weights();
  CHECK(w.dot(Eigen::Map<const Eigen::VectorXd>(y.data(), 500)) == doctest::Approx(fit.coef(1)).epsilon(1e-11));
}

TEST_CASE("tsls with d = z reproduces ols") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 1.0);
  std::vector<double> y, d;
  Eigen::MatrixXd cov(100, 1);
  for (int i = 0; i < 100; ++i) {
    d.push_back(i % 2);
    cov(i, 0) = noise(rng);
    y.push_back(0.5 + d.back() + cov(i, 0) + noise(rng));
  }
  Eigen::MatrixXd exog(100, 2);
  exog.col(0).setOnes();
  exog.col(1) = cov.col(0);
  const auto iv = tsls_fit(DesignMatrix(exog), d, d, y);
  Eigen::MatrixXd full(100, 3);
  full << exog, Eigen::Map<const Eigen::VectorXd>(d.data(), 100);
  const auto ols = ols_fit(DesignMatrix(full), y);
  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(iv.coef(j) == doctest::Approx(ols.coef(j)).epsilon(1e-11));
    CHECK(iv.stderr_of(j) == doctest::Approx(ols.stderr_of(j)).epsilon(1e-10));
  }
}

TEST_CASE("tsls recovers an exact structural coefficient") {
  // y = 1 + 2 d + 0.5 w exactly, d endogenous through z.
  const std::vector<double> z{0, 1, 0, 1, 1, 0, 1, 0};
  const std::vector<double> w{1.0, -0.5, 2.0, 0.0, 1.5, -1.0, 0.25, 3.0};
  const std::vector<double> d{0.2, 1.1, 0.0, 0.9, 1.4, 0.3, 0.8, 0.1};
  std::vector<double> y;
  for (std::size_t i = 0; i < 8; ++i) y.push_back(1.0 + 2.0 * d[i] + 0.5 * w[i]);
  Eigen::MatrixXd exog(8, 2);
  for (int i = 0; i < 8; ++i) {
    exog(i, 0) = 1.0;
    exog(i, 1) = w[static_cast<std::size_t>(i)];
  }
  const auto fit = tsls_fit(DesignMatrix(exog), d, z, y);
  CHECK(std::fabs(fit.coef(2) - 2.0) < 1e-10);
  CHECK(std::fabs(fit.coef(1) - 0.5) < 1e-10);
}

TEST_CASE("weak first stage is a warning flag, not a failure") {
  std::vector<double> z, d, y;
  for (int i = 0; i < 40; ++i) {
    z.push_back(i % 2);
    d.push_back((i / 2) % 2);  // unrelated to z
    y.push_back(i * 0.1);
  }
  d[0] = 1.0;  // keep the first stage barely identified
  const auto fit = tsls_fit(DesignMatrix::constant_only(40), d, z, y);
  CHECK(fit.weak_first_stage);
}

TEST_CASE("property: scale equivariance of coefficients and se, t-stats unchanged") {
  std::mt19937_64 rng(21);
  std::lognormal_distribution<double> ln(1.0, 1.0);
  std::normal_distribution<double> noise;
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> y, d;
    Eigen::MatrixXd cov(150, 1);
    std::vector<int> g;
    for (int i = 0; i < 150; ++i) {
      d.push_back(i % 2);
      cov(i, 0) = noise(rng);
      y.push_back(i % 5 == 0 ? 0.0 : ln(rng));
      g.push_back(i / 10);
    }
    const auto x = DesignMatrix::with_constant(d, cov, {"w"});
    const double a = std::exp(noise(rng) * 5.0);
    std::vector<double> ya(y);
    for (double& v : ya) v *= a;
    for (const auto& vc : {VcovSpec::hc0(), VcovSpec::clustered(g)}) {
      const auto f1 = ols_fit(x, y, vc);
      const auto fa = ols_fit(x, ya, vc);
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(std::fabs(fa.coef(j) - a * f1.coef(j)) <= 1e-10 * a * (std::fabs(f1.coef(j)) + 1e-3));
        CHECK(fa.stderr_of(j) == doctest::Approx(a * f1.stderr_of(j)).epsilon(1e-10));
        CHECK(std::fabs(fa.tstat(j) - f1.tstat(j)) < 1e-10 * (1.0 + std::fabs(f1.tstat(j))));
      }
    }
  }
}

TEST_CASE("property: beta(a)/log(a) -> gamma and t(a) -> t_gamma at a = 1e10") {
  // Empirical-distribution instance: regress arcsinh(a y) and 1[y > 0] on X.
  // The gap is gamma (log 2 + E[log y | y > 0]) / log(a) plus intensive-margin
  // noise, so positives are drawn with log(2y) centred at zero.
  std::mt19937_64 rng(33);
  std::lognormal_distribution<double> ln(-std::log(2.0), 0.5);
  std::normal_distribution<double> noise;
  std::uniform_real_distribution<double> unif;
  for (int rep = 0; rep < 5; ++rep) {
    const int n = 20000;
    std::vector<double> y, d;
    Eigen::MatrixXd cov(n, 1);
    for (int i = 0; i < n; ++i) {
      d.push_back(unif(rng) < 0.5 ? 1.0 : 0.0);
      cov(i, 0) = noise(rng);
      const double p_pos = std::clamp(0.3 + 0.3 * d.back() + 0.15 * cov(i, 0), 0.0, 1.0);
      y.push_back(unif(rng) < p_pos ? ln(rng) : 0.0);
    }
    const auto x = DesignMatrix::with_constant(d, cov, {"w"});
    const double a = 1e10;
    const auto beta = ols_fit(x, transform_values(y, Transform::arcsinh().with_scale(a)));
    const auto gamma = ols_fit(x, transform_values(y, Transform::indicator_positive()));
    for (std::size_t j = 1; j < 3; ++j) {
      if (std::fabs(gamma.coef(j)) < 1e-3) continue;
      CHECK(std::fabs(beta.coef(j) / std::log(a) - gamma.coef(j)) < 0.01 * std::fabs(gamma.coef(j)));
      CHECK(std::fabs(beta.tstat(j) - gamma.tstat(j)) < 0.01 * std::fabs(gamma.tstat(j)));
    }
  }
}
