#include "doctest.h"

#include "zeroeff/error.hpp"
#include "zeroeff/transforms.hpp"

#include <cmath>
#include <random>

using namespace zeroeff;

TEST_CASE("apply: worked values") {
  CHECK(Transform::arcsinh().apply(0.0) == 0.0);
  // log(1 + sqrt 2)
  CHECK(Transform::arcsinh().apply(1.0) == doctest::Approx(0.8813735870195429).epsilon(1e-15));
  CHECK(Transform::log1p().with_scale(100).apply(2.0) == doctest::Approx(5.303304908059076).epsilon(1e-15));

  const auto cal = Transform::calibrated_log(0.1, 15.68);
  CHECK(cal.apply(15.68) == 0.0);
  CHECK(cal.apply(0.0) == -0.1);
  CHECK(cal.apply(15.68 * 2.0) == doctest::Approx(std::log(2.0)));

  CHECK(Transform::indicator_positive().apply(0.0) == 0.0);
  CHECK(Transform::indicator_positive().apply(3.0) == 1.0);
  CHECK(Transform::threshold(5.0).apply(5.0) == 1.0);
  CHECK(Transform::threshold(5.0).apply(4.999) == 0.0);
  CHECK(Transform::log_c(2.0).apply(1.0) == doctest::Approx(std::log(3.0)));
  CHECK(Transform::identity().with_scale(3.0).apply(2.0) == 6.0);
}

TEST_CASE("apply: error paths") {
  CHECK_THROWS_AS(Transform::log().apply(0.0), Error);
  try {
    Transform::log().apply(0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainError);
  }
  try {
    // support must exclude (0, y_min e^{-x})
    Transform::calibrated_log(0.0, 10.0).apply(5.0);
    FAIL("expected MonotonicityViolation");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::MonotonicityViolation);
  }
  try {
    Transform::arcsinh().apply(NAN);
    FAIL("expected NonFiniteInput");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NonFiniteInput);
  }
  CHECK_THROWS_AS(Transform::log_c(0.0), Error);
  CHECK_THROWS_AS(Transform::rank({}), Error);
}

TEST_CASE("transform_column") {
  const Dataset d(DatasetColumns{.outcome = {0, 1}, .treatment = {0, 1}});
  const auto a = transform_column(d, Transform::arcsinh());
  CHECK(a[0] == 0.0);
  CHECK(a[1] == doctest::Approx(0.8813735870195429).epsilon(1e-15));

  const Dataset e(DatasetColumns{.outcome = {0, 3}, .treatment = {0, 1}});
  CHECK(transform_column(e, Transform::indicator_positive()) == std::vector<double>{0, 1});

  const Dataset f(DatasetColumns{.outcome = {5}, .treatment = {0}});
  CHECK(transform_column(f, Transform::rank({1, 5, 9}))[0] == doctest::Approx(2.0 / 3.0));

  try {
    transform_column(e, Transform::log());
    FAIL("expected DomainError");
  } catch (const Error& err) {
    CHECK(err.kind() == ErrorKind::DomainError);
    CHECK(std::string(err.what()).find("row 0") != std::string::npos);
  }
}

TEST_CASE("parse_transform spellings round-trip through name()") {
  const std::vector<double> y{0.0, 2.0, 8.0};
  CHECK(parse_transform("arcsinh").kind() == TransformKind::Arcsinh);
  CHECK(parse_transform("log1p").kind() == TransformKind::Log1p);
  CHECK(parse_transform("logc:c=0.5").shift() == 0.5);
  CHECK(parse_transform("calibrated:x=0.1", y).y_min() == 2.0);
  CHECK(parse_transform("calibrated:x=1,y_min=4").y_min() == 4.0);
  CHECK(parse_transform("indicator").kind() == TransformKind::IndicatorPositive);
  CHECK(parse_transform("threshold:y=50000").cutoff() == 50000.0);
  CHECK(parse_transform("rank", y).reference().size() == 3);
  CHECK(parse_transform("arcsinh:a=100").scale() == 100.0);
  CHECK(parse_transform("logc:c=0.25").name() == "logc:c=0.25");
  CHECK_THROWS_AS(parse_transform("boxcox"), Error);
  CHECK_THROWS_AS(parse_transform("logc"), Error);
  CHECK_THROWS_AS(parse_transform("logc:c=abc"), Error);
}

TEST_CASE("shift identity: log(1 + a y) = log(1/a + y) + log a") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> logy(-10, 10);
  std::uniform_real_distribution<double> loga(-8, 8);
  for (int rep = 0; rep < 2000; ++rep) {
    const double y = rep % 10 == 0 ? 0.0 : std::exp(logy(rng));
    const double a = std::exp(loga(rng));
    const double lhs = Transform::log1p().with_scale(a).apply(y);
    const double rhs = Transform::log_c(1.0 / a).apply(y) + std::log(a);
    CHECK(std::fabs(lhs - rhs) < 1e-12 * std::max(1.0, std::fabs(lhs)));
  }
}

TEST_CASE("log-like limit m(y)/log(y) -> 1") {
  double prev_ratio = INFINITY;
  for (double y : {1e8, 1e9, 1e12, 1e20, 1e100, 1e300}) {
    CHECK(std::fabs(Transform::log1p().apply(y) / std::log(y) - 1.0) < 1e-6);
    // arcsinh(y) = log(2y) + O(1/y^2): the ratio approaches 1 from above at
    // rate log(2)/log(y), which no finite double brings under 1e-6.
    const double ratio = Transform::arcsinh().apply(y) / std::log(y);
    CHECK(std::fabs(ratio - 1.0 - std::log(2.0) / std::log(y)) < 1e-6);
    CHECK(ratio < prev_ratio);
    prev_ratio = ratio;
  }
}

TEST_CASE("arcsinh branches agree at the switch point and stay finite") {
  const double below = arcsinh_log_form(std::nextafter(1e8, 0.0));
  const double above = arcsinh_log_form(std::nextafter(1e8, INFINITY));
  CHECK(std::fabs(above - below) < 1e-14);
  CHECK(std::isfinite(arcsinh_log_form(1e300)));
  CHECK(arcsinh_log_form(1e300) == doctest::Approx(std::log(2e300)));
  CHECK(arcsinh_log_form(1e-20) == doctest::Approx(1e-20).epsilon(1e-12));
  CHECK(arcsinh_log_form(3.0) == doctest::Approx(std::asinh(3.0)).epsilon(1e-15));
}

TEST_CASE("property: every kind is weakly increasing on its domain") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> logy(-6, 12);
  std::vector<double> ref;
  for (int i = 0; i < 50; ++i) ref.push_back(std::exp(logy(rng)));
  const std::vector<Transform> kinds{
      Transform::identity(),           Transform::log1p(),        Transform::arcsinh(),
      Transform::log_c(0.3),           Transform::indicator_positive(), Transform::threshold(10.0),
      Transform::rank(ref),            Transform::log1p().with_scale(1e6),
      Transform::calibrated_log(2.0, 1e-6 * std::exp(2.0)),
  };
  for (int rep = 0; rep < 3000; ++rep) {
    double a = rep % 7 == 0 ? 0.0 : std::exp(logy(rng));
    double b = std::exp(logy(rng));
    if (a > b) std::swap(a, b);
    for (const auto& t : kinds) {
      CHECK(t.apply(a) <= t.apply(b));
    }
    CHECK(Transform::log().apply(std::max(a, 1e-300)) <= Transform::log().apply(b));
  }
}

TEST_CASE("property: rank is in [0,1] and increasing") {
  const auto t = Transform::rank({3, 1, 4, 1, 5, 9, 2, 6});
  double prev = -1.0;
  for (double y = 0.0; y < 12.0; y += 0.25) {
    const double r = t.apply(y);
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(r >= prev);
    prev = r;
  }
  CHECK(t.apply(1.0) == doctest::Approx(2.0 / 8.0));  // ties count as <=
  CHECK(t.apply(100.0) == 1.0);
}

TEST_CASE("min_positive") {
  const std::vector<double> y{0, 15.68, 20, 0};
  CHECK(min_positive(y) == 15.68);
  const std::vector<double> zeros{0, 0};
  CHECK_THROWS_AS(min_positive(zeros), Error);
}
