#include "zeroeff/inference.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/parallel.hpp"
#include "zeroeff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace zeroeff {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

BootstrapSummary summarize(std::vector<double> reps) {
  BootstrapSummary s;
  std::vector<double> ok;
  for (double v : reps) {
    if (!std::isnan(v)) ok.push_back(v);
  }
  s.replicates = std::move(reps);
  const auto m = static_cast<double>(ok.size());
  if (ok.size() < 2) {
    s.se = s.ci_low = s.ci_high = s.mean = kNaN;
    return s;
  }
  double mean = 0.0;
  for (double v : ok) mean += v;
  mean /= m;
  double m2 = 0.0, m3 = 0.0;
  for (double v : ok) {
    const double e = v - mean;
    m2 += e * e;
    m3 += e * e * e;
  }
  s.mean = mean;
  s.se = std::sqrt(m2 / (m - 1.0));
  s.skewness = m2 > 0.0 ? (m3 / m) / std::pow(m2 / m, 1.5) : 0.0;
  std::sort(ok.begin(), ok.end());
  s.ci_low = left_quantile(ok, 0.025);
  s.ci_high = left_quantile(ok, 0.975);
  return s;
}

}  // namespace

void BootstrapSpec::validate() const {
  if (draws < 2) throw Error(ErrorKind::InvalidBootstrapSpec, "bootstrap needs at least 2 draws");
  if (!(max_failure_rate >= 0.0 && max_failure_rate <= 1.0)) {
    throw Error(ErrorKind::InvalidBootstrapSpec, "max_failure_rate must lie in [0,1]");
  }
}

Dataset bootstrap_resample(const Dataset& d, const BootstrapSpec& spec, std::size_t r) {
  Philox rng(spec.seed, r);
  std::vector<std::size_t> rows;
  if (spec.cluster && d.has_cluster()) {
    const std::size_t G = d.cluster_count();
    std::vector<std::vector<std::size_t>> members(G);
    for (std::size_t i = 0; i < d.rows(); ++i) members[static_cast<std::size_t>(d.cluster()[i])].push_back(i);
    std::vector<int> ids;
    rows.reserve(d.rows());
    for (std::size_t k = 0; k < G; ++k) {
      const auto& m = members[rng.below(G)];
      rows.insert(rows.end(), m.begin(), m.end());
      ids.insert(ids.end(), m.size(), static_cast<int>(k));
    }
    return d.select_rows(rows, std::move(ids));
  }
  rows.resize(d.rows());
  for (auto& i : rows) i = rng.below(d.rows());
  return d.select_rows(rows);
}

BootstrapResult cluster_bootstrap(const Dataset& d, const VectorStatistic& stat, const BootstrapSpec& spec) {
  spec.validate();
  const bool clustered = spec.cluster && d.has_cluster();
  if (clustered && d.cluster_count() < 2) {
    throw Error(ErrorKind::TooFewClusters, "cluster bootstrap needs at least 2 clusters");
  }
  std::vector<std::vector<double>> values(spec.draws);
  std::vector<std::string> failures(spec.draws);
  parallel_for(spec.draws, spec.threads, [&](std::size_t r) {
    try {
      values[r] = stat(bootstrap_resample(d, spec, r));
    } catch (const Error& e) {
      failures[r] = e.what();
    }
  });

  std::size_t width = 0;
  std::size_t failed = 0;
  std::size_t first_failure = spec.draws;
  for (std::size_t r = 0; r < spec.draws; ++r) {
    if (!failures[r].empty()) {
      ++failed;
      first_failure = std::min(first_failure, r);
    } else {
      width = std::max(width, values[r].size());
    }
  }
  if (static_cast<double>(failed) > spec.max_failure_rate * static_cast<double>(spec.draws)) {
    throw Error(ErrorKind::EstimatorFailedOnDraw,
                std::to_string(failed) + " of " + std::to_string(spec.draws) + " draws failed; first (draw " +
                    std::to_string(first_failure) + "): " + failures[first_failure]);
  }

  BootstrapResult out;
  out.draws = spec.draws;
  out.failed = failed;
  out.seed = spec.seed;
  out.clustered = clustered;
  for (std::size_t k = 0; k < width; ++k) {
    std::vector<double> reps(spec.draws, kNaN);
    for (std::size_t r = 0; r < spec.draws; ++r) {
      if (failures[r].empty() && k < values[r].size()) reps[r] = values[r][k];
    }
    out.components.push_back(summarize(std::move(reps)));
  }
  return out;
}

BootstrapResult cluster_bootstrap(const Dataset& d, const Statistic& stat, const BootstrapSpec& spec) {
  return cluster_bootstrap(d, VectorStatistic([&](const Dataset& s) { return std::vector<double>{stat(s)}; }), spec);
}

DeltaResult delta_exp_minus_one(double beta, double se_beta) {
  if (!(se_beta >= 0.0)) throw Error(ErrorKind::DomainError, "standard error must be non-negative");
  return {std::expm1(beta), std::exp(beta) * se_beta};
}

double left_quantile(std::span<const double> sorted, double u) {
  if (sorted.empty()) throw Error(ErrorKind::EmptyDataset, "quantile of an empty sample");
  if (!(u >= 0.0 && u <= 1.0)) throw Error(ErrorKind::DomainError, "quantile level outside [0,1]");
  const auto n = static_cast<double>(sorted.size());
  // smallest k with k / n >= u
  auto k = static_cast<std::size_t>(std::ceil(u * n - 1e-12 * n));
  k = std::clamp<std::size_t>(k, 1, sorted.size());
  return sorted[k - 1];
}

}  // namespace zeroeff
