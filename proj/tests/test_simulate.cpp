#include "doctest.h"

#include "zeroeff/error.hpp"
#include "zeroeff/rng.hpp"
#include "zeroeff/simulate.hpp"

#include <cmath>
#include <set>

using namespace zeroeff;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox::Counter;
  CHECK(Philox::block({0, 0, 0, 0}, {0, 0}) == C{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Philox::block({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        C{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Philox::block({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        C{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("Philox streams are pure functions of (seed, stream)") {
  Philox a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
}

TEST_CASE("Philox below() is unbiased on a small range") {
  Philox r(1, 0);
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 30000; ++i) ++counts[r.below(3)];
  for (int c : counts) CHECK(std::abs(c - 10000) < 400);
  double s = 0, ss = 0;
  for (int i = 0; i < 100000; ++i) {
    const double z = r.normal();
    s += z;
    ss += z * z;
  }
  CHECK(std::fabs(s / 1e5) < 0.02);
  CHECK(std::fabs(ss / 1e5 - 1.0) < 0.02);
}

TEST_CASE("two-point DGP population values") {
  const auto g = DiscreteDgp::two_point();
  CHECK(g.extensive_margin() == 0.25);
  CHECK(g.ate_pct() == doctest::Approx(2.0));  // 1.5 / 0.5 - 1
  const auto d = simulate(g, 3);
  CHECK(d.rows() == 100000);
  std::set<double> values(d.outcome().begin(), d.outcome().end());
  CHECK(values == std::set<double>{0.0, 1.0, 2.0});
  const auto m = manifest_json(g);
  CHECK(m.find("\"log1p\": 0.477") != std::string::npos);
  CHECK(m.find("\"find_scale_applicable\": true") != std::string::npos);
}

TEST_CASE("simulated CSV is byte-identical for a fixed seed and round-trips") {
  LognormalZerosDgp g;
  g.n = 500;
  g.cluster_size = 5;
  const auto a = dataset_csv(simulate(g, 11));
  const auto b = dataset_csv(simulate(g, 11));
  CHECK(a == b);
  CHECK(a != dataset_csv(simulate(g, 12)));
  const auto d = simulate(g, 11);
  CHECK(parse_csv(a, simulated_spec(d)) == d);

  const auto nc = simulate(NoncomplianceDgp::with_effect(-0.2), 4);
  CHECK(parse_csv(dataset_csv(nc), simulated_spec(nc)) == nc);
}

TEST_CASE("noncompliance DGP: one-sided and with the requested complier effect") {
  const auto g = NoncomplianceDgp::with_effect(-0.2);
  CHECK(g.complier_effect_pct() == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(g.complier_cdf(0, 0.0) == doctest::Approx(0.5));
  CHECK(g.complier_cdf(1, 0.0) == doctest::Approx(0.4));
  CHECK(g.complier_cdf(1, 1e300) == doctest::Approx(1.0));
  const auto d = simulate(g, 5);
  std::size_t violations = 0;
  for (std::size_t i = 0; i < d.rows(); ++i) violations += d.instrument()[i] == 0.0 && d.treatment()[i] != 0.0;
  CHECK(violations == 0);
  const auto m = manifest_json(g);
  CHECK(m.find("complier_ate_pct") != std::string::npos);
}

TEST_CASE("zero-extensive-margin manifest marks the scale search inapplicable") {
  LognormalZerosDgp g;
  g.p_pos1 = g.p_pos0;
  CHECK(manifest_json(g).find("\"find_scale_applicable\": false") != std::string::npos);
}

TEST_CASE("invalid DGP parameters") {
  LognormalZerosDgp g;
  g.p_pos0 = 1.5;
  CHECK_THROWS_AS(simulate(g, 1), Error);
  DiscreteDgp h = DiscreteDgp::two_point();
  h.treated.probs = {0.5, 0.6};
  CHECK_THROWS_AS(simulate(h, 1), Error);
}
