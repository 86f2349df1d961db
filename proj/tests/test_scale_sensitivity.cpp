#include "doctest.h"

#include "zeroeff/error.hpp"
#include "zeroeff/scale_sensitivity.hpp"
#include "zeroeff/simulate.hpp"

#include <cmath>

using namespace zeroeff;

namespace {

const Dataset& two_point() {
  static const Dataset d = simulate(DiscreteDgp::two_point(), 20240601);
  return d;
}

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an Error");
  return ErrorKind::InvalidConfig;
}

}  // namespace

TEST_CASE("two-point DGP: population theta(1) for log1p") {
  const auto g = DiscreteDgp::two_point();
  const double exact = 0.75 * std::log(3.0) - 0.5 * std::log(2.0);
  CHECK(g.theta(Transform::log1p()) == doctest::Approx(exact).epsilon(1e-15));
  CHECK(std::fabs(exact - 0.4774) < 1e-4);
  const auto est = theta_at(two_point(), Transform::log1p(), 1.0);
  CHECK(std::fabs(est.value - exact) < 3.0 * est.se);
  CHECK(est.n == 100000);
}

TEST_CASE("zero-scale limit") {
  for (const auto& t : {Transform::log1p(), Transform::arcsinh()}) {
    CHECK(std::fabs(theta_at(two_point(), t, 1e-12).value) < 1e-10);
  }
}

TEST_CASE("slope of theta on log(a) is the extensive margin") {
  const auto c = sensitivity_curve(two_point(), Transform::log1p(), {1e4, 1e5, 1e6, 1e7, 1e8});
  CHECK(std::fabs(log_slope(c, 1e4, 1e8) - 0.25) < 0.01);
  CHECK(std::fabs(c.extensive_margin.value - 0.25) < 3 * c.extensive_margin.se);
  CHECK(c.extensive_margin.se >= 0.0);
}

TEST_CASE("rescale-by-100 arithmetic: change vs gamma log(100)") {
  // Reference row: raw change 0.252 against extensive margin 0.055.
  CHECK(0.055 * std::log(100.0) == doctest::Approx(0.253).epsilon(1e-3));
  CHECK(std::fabs(0.055 * std::log(100.0) - 0.252) < 2e-3);

  const auto s = rescale_summary(two_point(), Transform::arcsinh());
  CHECK(s.raw_change == doctest::Approx(s.theta_100 - s.theta_1));
  CHECK(s.pct_change == doctest::Approx(100.0 * s.raw_change / s.theta_1));
  CHECK(s.predicted_change == doctest::Approx(s.gamma * std::log(100.0)));
}

TEST_CASE("strictly positive outcomes: theta stabilises at large a") {
  LognormalZerosDgp g;
  g.p_pos0 = g.p_pos1 = 1.0;
  g.n = 5000;
  const auto raw = simulate(g, 5);
  std::vector<double> shifted(raw.outcome().begin(), raw.outcome().end());
  for (double& v : shifted) v += 1.0;  // bounded away from zero
  const auto d = raw.with_outcome(shifted);
  const auto c = sensitivity_curve(d, Transform::arcsinh(), log_grid(1e6, 1e8, 9));
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (c.grid[i] < 1e7) continue;
    lo = std::min(lo, c.theta[i]);
    hi = std::max(hi, c.theta[i]);
  }
  CHECK(hi - lo < 1e-4);
  const double log_ate = theta_at(d, Transform::log(), 1.0).value;
  CHECK(std::fabs(c.theta.back() - log_ate) < 1e-6);
  CHECK(std::fabs(c.extensive_margin.value) < 1e-12);
}

TEST_CASE("sensitivity_curve shape and approximation anchor") {
  const auto c = sensitivity_curve(two_point(), Transform::arcsinh(), default_grid());
  REQUIRE(c.grid.size() == 25);
  CHECK(c.grid.front() == 1e-4);
  CHECK(c.grid.back() == 1e8);
  CHECK(c.theta.size() == 25);
  CHECK(c.approx.size() == 25);
  CHECK(c.anchor == 1.0);  // 1e-4 * 10^(0.5 k) hits 1 at k = 8
  for (std::size_t i = 1; i < c.grid.size(); ++i) CHECK(c.grid[i] > c.grid[i - 1]);
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (c.grid[i] == c.anchor) CHECK(c.approx[i] == c.theta[i]);
    CHECK(c.tstat[i] == doctest::Approx(c.theta[i] / c.se[i]));
  }
  CHECK(kind_of([] { sensitivity_curve(two_point(), Transform::arcsinh(), {1.0, 1.0}); }) == ErrorKind::InvalidConfig);
  CHECK(kind_of([] { sensitivity_curve(two_point(), Transform::arcsinh(), {-1.0, 1.0}); }) == ErrorKind::NonPositiveScale);
}

TEST_CASE("grid order and values do not depend on the thread count") {
  SensitivityOptions one, many;
  many.threads = 7;
  const auto a = sensitivity_curve(two_point(), Transform::arcsinh(), default_grid(), one);
  const auto b = sensitivity_curve(two_point(), Transform::arcsinh(), default_grid(), many);
  CHECK(a.theta == b.theta);
  CHECK(a.se == b.se);
  CHECK(curve_csv(a) == curve_csv(b));
}

TEST_CASE("find_scale_for_target hits targets") {
  for (double target : {0.1, 1.0, 10.0}) {
    const auto s = find_scale_for_target(two_point(), Transform::log1p(), target);
    CHECK(std::fabs(std::fabs(s.theta) - target) < 1e-6);
    CHECK(std::fabs(std::fabs(theta_at(two_point(), Transform::log1p(), s.a).value) - target) < 1e-6);
    CHECK(s.bisection_steps < 60);
  }
  const double t1 = std::fabs(theta_at(two_point(), Transform::arcsinh(), 1.0).value);
  const auto s = find_scale_for_target(two_point(), Transform::arcsinh(), t1);
  CHECK(std::fabs(std::fabs(s.theta) - t1) < 1e-6);
}

TEST_CASE("find_scale_for_target preconditions") {
  const Dataset no_zeros(DatasetColumns{.outcome = {1, 2, 3, 4}, .treatment = {0, 0, 1, 1}});
  CHECK(kind_of([&] { find_scale_for_target(no_zeros, Transform::arcsinh(), 1.0); }) == ErrorKind::NoExtensiveMargin);
  CHECK(kind_of([] { find_scale_for_target(two_point(), Transform::arcsinh(), 0.0); }) == ErrorKind::DomainError);
  // |theta| cannot exceed ~0.25 * log(1e300 * 2) before overflow of a y.
  CHECK(kind_of([] { find_scale_for_target(two_point(), Transform::log1p(), 1e6); }) == ErrorKind::BracketNotFound);
}

TEST_CASE("t-statistics converge to the extensive-margin t-stat at rate 1/log(a)") {
  const auto tab = tstat_table(two_point(), Transform::log1p(), {1e10, 1e50, 1e100, 1e300});
  REQUIRE(tab.rows.size() == 4);
  CHECK(tab.convergence_expected);
  double prev = INFINITY;
  for (const auto& r : tab.rows) {
    const double gap = std::fabs(r.t_theta - r.t_gamma) / std::fabs(r.t_gamma);
    // At these scales m(a y) = 1[y > 0] (log a + log y) to double precision,
    // so the gap is the intensive term against gamma log(a).
    std::vector<double> limit;
    for (double y : two_point().outcome()) limit.push_back(y > 0 ? std::log(r.a) + std::log(y) : 0.0);
    const auto lim = theta_at(two_point().with_outcome(limit), Transform::identity(), 1.0);
    CHECK(r.t_theta == doctest::Approx(lim.tstat).epsilon(1e-9));
    CHECK(gap < prev);
    prev = gap;
  }
  CHECK(prev < 0.01);

  const Dataset no_zeros(DatasetColumns{.outcome = {1, 2, 3, 4}, .treatment = {0, 0, 1, 1}});
  CHECK_FALSE(tstat_table(no_zeros, Transform::arcsinh(), {1.0, 10.0}).convergence_expected);
}

TEST_CASE("dollars to cents compensated by a = 100 is bit-identical") {
  const auto cents = rescale_outcome(two_point(), 100.0);
  for (const auto& t : {Transform::arcsinh(), Transform::log1p()}) {
    const auto a = theta_at(cents, t, 1.0);
    const auto b = theta_at(two_point(), t, 100.0);
    CHECK(a.value == b.value);
    CHECK(a.tstat == b.tstat);
  }
}

TEST_CASE("property: compensation identity across k and a") {
  LognormalZerosDgp g;
  g.n = 2000;
  g.cluster_size = 10;
  const auto d = simulate(g, 9);
  for (double k : {1e-3, 0.37, 100.0, 2.5e4}) {
    for (double a : {1e-2, 1.0, 7.0, 1e5}) {
      const auto lhs = theta_at(rescale_outcome(d, k), Transform::arcsinh(), a);
      const auto rhs = theta_at(d, Transform::arcsinh(), k * a);
      CHECK(std::fabs(lhs.value - rhs.value) <= 1e-12 * (1.0 + std::fabs(rhs.value)));
      CHECK(std::fabs(lhs.se - rhs.se) <= 1e-12 * (1.0 + rhs.se));
    }
  }
}

TEST_CASE("property: log1p at scale a equals log(1/a + y) at scale 1") {
  LognormalZerosDgp g;
  g.n = 3000;
  const auto d = simulate(g, 10);
  for (double a : {1e-4, 0.01, 1.0, 50.0, 1e4}) {
    const double lhs = theta_at(d, Transform::log1p(), a).value;
    const double rhs = theta_at(d, Transform::log_c(1.0 / a), 1.0).value;
    CHECK(std::fabs(lhs - rhs) < 1e-12 * std::max(1.0, std::fabs(lhs)));
  }
}

TEST_CASE("property: divergence on a geometric grid when gamma > 0") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    LognormalZerosDgp g;
    g.n = 4000;
    g.p_pos1 = 0.7;
    const auto d = simulate(g, seed);
    std::vector<double> grid;
    for (int k = 0; k <= 12; ++k) grid.push_back(std::pow(10.0, k));
    const auto c = sensitivity_curve(d, Transform::arcsinh(), grid, {Engine::Covariates, {}, 1});
    REQUIRE(c.extensive_margin.value > 0.0);
    CHECK(c.theta.back() > c.theta.front() + 20.0 * c.extensive_margin.value);
    for (std::size_t i = 8; i < c.theta.size(); ++i) CHECK(c.theta[i] > c.theta[i - 1]);
  }
}

TEST_CASE("curve emission") {
  const auto c = sensitivity_curve(two_point(), Transform::arcsinh(), {0.5, 1.0, 2.0});
  const auto csv = curve_csv(c);
  CHECK(csv.rfind("a,theta,se,tstat,approx\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  const auto json = curve_json(c);
  CHECK(json.find("\"extensive_margin\"") != std::string::npos);
  CHECK(json.find("\"transform\": \"arcsinh\"") != std::string::npos);
}
