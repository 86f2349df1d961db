#pragma once

#include "zeroeff/dataset.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace zeroeff {

struct BootstrapSpec {
  std::size_t draws = 1000;
  std::uint64_t seed = 20240101;
  bool cluster = true;  // resample clusters when the dataset has them
  unsigned threads = 1;
  double max_failure_rate = 0.10;

  void validate() const;
};

/// Replicate summary for one scalar component of a statistic.
struct BootstrapSummary {
  double se = 0.0;  // sd of successful replicates (n - 1 denominator)
  double ci_low = 0.0;
  double ci_high = 0.0;
  double mean = 0.0;
  double skewness = 0.0;
  std::vector<double> replicates;  // by draw index; NaN marks a failed draw
};

struct BootstrapResult {
  std::vector<BootstrapSummary> components;
  std::size_t draws = 0;
  std::size_t failed = 0;
  std::uint64_t seed = 0;
  bool clustered = false;

  const BootstrapSummary& operator[](std::size_t k) const { return components.at(k); }
};

using Statistic = std::function<double(const Dataset&)>;
using VectorStatistic = std::function<std::vector<double>(const Dataset&)>;

/// Rows of resample r: G clusters drawn with replacement (or n rows when
/// unclustered), a pure function of (seed, r). Cluster ids are relabelled by
/// draw position so a cluster drawn twice counts as two clusters.
Dataset bootstrap_resample(const Dataset& d, const BootstrapSpec& spec, std::size_t r);

/// Pairs (cluster) bootstrap. Draws whose statistic throws an Error are
/// recorded as failed; more than max_failure_rate failures aborts with
/// EstimatorFailedOnDraw.
BootstrapResult cluster_bootstrap(const Dataset& d, const VectorStatistic& stat, const BootstrapSpec& spec);
BootstrapResult cluster_bootstrap(const Dataset& d, const Statistic& stat, const BootstrapSpec& spec);

struct DeltaResult {
  double value = 0.0;
  double se = 0.0;
};

/// (exp(beta) - 1, exp(beta) * se_beta).
DeltaResult delta_exp_minus_one(double beta, double se_beta);

/// Left-continuous generalized inverse inf{y : F(y) >= u} of the empirical
/// distribution of an ascending sample.
double left_quantile(std::span<const double> sorted, double u);

}  // namespace zeroeff
