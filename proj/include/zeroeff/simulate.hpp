#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/transforms.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace zeroeff {

/// Outcome law of one arm: finite support with probabilities.
struct DiscreteLaw {
  std::vector<double> support;
  std::vector<double> probs;

  double mean() const;
  double prob_positive() const;
  double expect(const Transform& m) const;
};

/// Randomized binary treatment with a discrete outcome law per arm.
struct DiscreteDgp {
  DiscreteLaw control;
  DiscreteLaw treated;
  double p_treat = 0.5;
  std::size_t n = 100000;
  std::size_t cluster_size = 0;  // 0: no cluster column

  /// Y(0) = 0 w.p. .5 else 1; Y(1) = 0 w.p. .25 else 2.
  static DiscreteDgp two_point();

  void validate() const;
  /// Population theta(a) = E[m(a Y(1))] - E[m(a Y(0))].
  double theta(const Transform& m, double a = 1.0) const;
  double extensive_margin() const { return treated.prob_positive() - control.prob_positive(); }
  double ate_pct() const { return treated.mean() / control.mean() - 1.0; }
};

/// Randomized treatment; Y = 0 w.p. 1 - p_d, else lognormal(mu_d + beta_x x, sigma).
struct LognormalZerosDgp {
  double p_pos0 = 0.5;
  double p_pos1 = 0.6;
  double mu0 = 0.0;
  double mu1 = 0.2;
  double sigma = 1.0;
  double beta_x = 0.0;
  double p_treat = 0.5;
  std::size_t n = 10000;
  std::size_t cluster_size = 0;

  void validate() const;
  double extensive_margin() const { return p_pos1 - p_pos0; }
  /// Ratio of arm means minus one (beta_x shifts both arms equally).
  double ate_pct() const;
  double intensive_log_effect() const { return mu1 - mu0; }
};

/// Z randomized, D = Z * S with S ~ Bernoulli(p_complier). Compliers draw
/// Y(d) = 0 w.p. 1 - p_pos_d, else lognormal(mu_d, sigma); never-takers draw
/// their untreated outcome from (p_pos_nt, mu_nt).
struct NoncomplianceDgp {
  double p_complier = 0.6;
  double p_pos0 = 0.5;
  double p_pos1 = 0.6;
  double mu0 = 0.0;
  double mu1 = 0.0;  // set by with_effect
  double sigma = 0.8;
  double p_pos_nt = 0.4;
  double mu_nt = 0.5;
  double p_instrument = 0.5;
  std::size_t n = 100000;
  std::size_t cluster_size = 0;

  /// Default shares with mu1 chosen so E[Y(1)|C]/E[Y(0)|C] - 1 = effect.
  static NoncomplianceDgp with_effect(double effect);

  void validate() const;
  double complier_cdf(int d, double y) const;
  double complier_effect_pct() const;
  /// Outcome-sense shares among instrument-compliers.
  double share_always() const { return std::min(p_pos0, p_pos1); }
  double share_never() const { return 1.0 - std::max(p_pos0, p_pos1); }
};

/// Columns: y, d, plus x (lognormal and noncompliance), z (noncompliance)
/// and cluster (when cluster_size > 0).
Dataset simulate(const DiscreteDgp& g, std::uint64_t seed);
Dataset simulate(const LognormalZerosDgp& g, std::uint64_t seed);
Dataset simulate(const NoncomplianceDgp& g, std::uint64_t seed);

/// Header y,d[,z][,x][,cluster]; the inverse of parse_csv with the same names.
std::string dataset_csv(const Dataset& d);
ColumnSpec simulated_spec(const Dataset& d);

/// Population parameters as a JSON object.
std::string manifest_json(const DiscreteDgp& g);
std::string manifest_json(const LognormalZerosDgp& g);
std::string manifest_json(const NoncomplianceDgp& g);

}  // namespace zeroeff
