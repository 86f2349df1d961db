#include "zeroeff/bounds.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/parallel.hpp"
#include "zeroeff/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

namespace zeroeff {

namespace {

struct ArmPositives {
  std::vector<double> values;  // m(y) for y > 0, ascending
  std::size_t n = 0;           // arm size
  double mean() const { return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size()); }
  std::size_t k() const { return values.size(); }
};

double scale_value(double y, OutcomeScale s) { return s == OutcomeScale::Log ? std::log(y) : y; }

ArmPositives positives(const Dataset& d, double arm, OutcomeScale s) {
  ArmPositives a;
  for (std::size_t i = 0; i < d.rows(); ++i) {
    if (d.treatment()[i] != arm) continue;
    ++a.n;
    if (d.outcome()[i] > 0.0) a.values.push_back(scale_value(d.outcome()[i], s));
  }
  std::sort(a.values.begin(), a.values.end());
  return a;
}

// Mean of the lowest (or highest) `mass` units, splitting the boundary unit.
double trimmed_mean(const std::vector<double>& v, double mass, bool low) {
  const auto full = static_cast<std::size_t>(std::floor(mass));
  const double frac = mass - static_cast<double>(full);
  double sum = 0.0;
  for (std::size_t i = 0; i < full; ++i) sum += low ? v[i] : v[v.size() - 1 - i];
  if (frac > 0.0 && full < v.size()) sum += frac * (low ? v[full] : v[v.size() - 1 - full]);
  return sum / mass;
}

void require_two_arms(const ArmPositives& t, const ArmPositives& c) {
  if (t.n == 0 || c.n == 0) throw Error(ErrorKind::EmptyCell, "both treatment arms must be non-empty");
}

BoundsResult lee_point(const Dataset& d, OutcomeScale scale) {
  d.require_binary_treatment();
  const auto t = positives(d, 1.0, scale);
  const auto c = positives(d, 0.0, scale);
  require_two_arms(t, c);
  if (t.k() == 0 && c.k() == 0) throw Error(ErrorKind::ZeroTrimDenominator, "no positive outcomes in either arm");
  if (t.k() == 0 || c.k() == 0) {
    throw Error(ErrorKind::NoPositiveOutcomes, t.k() == 0 ? "no positive treated outcomes" : "no positive control outcomes");
  }
  // q1 >= q0  <=>  k1 n0 >= k0 n1, compared in exact integer arithmetic
  const double a = static_cast<double>(t.k()) * static_cast<double>(c.n);
  const double b = static_cast<double>(c.k()) * static_cast<double>(t.n);
  BoundsResult r;
  r.scale = scale;
  r.n = d.rows();
  if (a >= b) {
    r.direction = Direction::TreatedRetains;
    const double keep = b / static_cast<double>(c.n);  // k0 n1 / n0 treated units
    const double m0 = c.mean();
    r.lower = trimmed_mean(t.values, keep, true) - m0;
    r.upper = trimmed_mean(t.values, keep, false) - m0;
    r.trim_fraction = (a - b) / a;
  } else {
    r.direction = Direction::ControlRetains;
    const double keep = a / static_cast<double>(t.n);
    const double m1 = t.mean();
    r.lower = m1 - trimmed_mean(c.values, keep, false);
    r.upper = m1 - trimmed_mean(c.values, keep, true);
    r.trim_fraction = (b - a) / b;
  }
  return r;
}

double selection_value(const Dataset& d, double c) {
  d.require_binary_treatment();
  if (!(c >= 0.0 && c < 1.0)) throw Error(ErrorKind::InvalidC, "c must lie in [0, 1)");
  const auto t = positives(d, 1.0, OutcomeScale::Levels);
  const auto ct = positives(d, 0.0, OutcomeScale::Levels);
  require_two_arms(t, ct);
  if (t.k() == 0 || ct.k() == 0) throw Error(ErrorKind::DegenerateShares, "an arm has no positive outcomes");
  const double a = static_cast<double>(t.k()) * static_cast<double>(ct.n);
  const double b = static_cast<double>(ct.k()) * static_cast<double>(t.n);
  if (a >= b) {
    // theta = b / a; E1 / (theta + (1 - c)(1 - theta)) = E1 a / (a - c (a - b))
    return t.mean() * a / (a - c * (a - b)) - ct.mean();
  }
  return t.mean() - ct.mean() * b / (b - c * (b - a));
}

double at_zero(const std::vector<double>& grid, const std::vector<double>& F) {
  return !grid.empty() && grid.front() <= 0.0 ? F.front() : 0.0;
}

}  // namespace

std::string to_string(OutcomeScale s) { return s == OutcomeScale::Log ? "log" : "levels"; }
std::string to_string(Direction d) { return d == Direction::TreatedRetains ? "treated_retains" : "control_retains"; }

OutcomeScale parse_scale(const std::string& s) {
  if (s == "log") return OutcomeScale::Log;
  if (s == "levels") return OutcomeScale::Levels;
  throw Error(ErrorKind::InvalidConfig, "unknown outcome scale '" + s + "'");
}

BoundsResult lee_bounds(const Dataset& d, OutcomeScale scale, const std::optional<BootstrapSpec>& boot) {
  BoundsResult r = lee_point(d, scale);
  if (boot) {
    const auto b = cluster_bootstrap(
        d, VectorStatistic([scale](const Dataset& s) {
          const auto x = lee_point(s, scale);
          return std::vector<double>{x.lower, x.upper};
        }),
        *boot);
    r.se_lower = b[0].se;
    r.se_upper = b[1].se;
    r.bootstrap_draws = b.draws;
  }
  return r;
}

EstimateResult selection_point_estimate(const Dataset& d, double c, const std::optional<BootstrapSpec>& boot) {
  const double value = selection_value(d, c);
  double se = 0.0;
  std::size_t draws = 0;
  if (boot) {
    const auto b = cluster_bootstrap(d, Statistic([c](const Dataset& s) { return selection_value(s, c); }), *boot);
    se = b[0].se;
    draws = b.draws;
  }
  auto r = EstimateResult::make(value, se, d.rows(), "selection_c", "levels");
  r.meta["c"] = c;
  if (boot) r.meta["bootstrap_draws"] = static_cast<double>(draws);
  return r;
}

double ComplierCdfs::cdf_at(int arm, double y) const {
  const auto& F = arm ? F1 : F0;
  const auto it = std::upper_bound(grid.begin(), grid.end(), y);
  if (it == grid.begin()) return 0.0;
  return F[static_cast<std::size_t>(it - grid.begin()) - 1];
}

double ComplierCdfs::inverse(int arm, double u) const {
  const auto& F = arm ? F1 : F0;
  // estimated CDFs reach their plateaus only up to rounding
  const auto it = std::lower_bound(F.begin(), F.end(), u - 1e-12);
  if (it == F.end()) return grid.back();
  return grid[static_cast<std::size_t>(it - F.begin())];
}

ComplierCdfs complier_cdfs(const Dataset& d, const ComplierOptions& opts) {
  if (!d.has_instrument()) throw Error(ErrorKind::MissingInstrument, "complier CDFs need an instrument column");
  d.require_binary_treatment();
  const std::size_t n = d.rows();
  const TslsSolver solver(DesignMatrix::constant_only(n), d.treatment(), d.instrument(), vcov_for(d, opts.inference));
  ComplierCdfs out;
  out.n = n;
  out.first_stage_t = solver.first_stage_t();
  if (!opts.allow_weak && solver.weak_first_stage()) {
    throw Error(ErrorKind::WeakFirstStage, "first-stage t = " + std::to_string(out.first_stage_t) + " (|t| < 2)");
  }
  const Eigen::VectorXd w = solver.endogenous_weights();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d.outcome()[a] < d.outcome()[b]; });

  // Coefficient for outcome D 1[Y <= y] is sum of w_i D_i over Y_i <= y.
  std::vector<double> values, c1, c0;
  long double a1 = 0.0L, a0 = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = order[k];
    const double wi = w(static_cast<Eigen::Index>(i));
    if (d.treatment()[i] == 1.0) {
      a1 += wi;
    } else {
      a0 -= wi;  // (1 - D) 1[Y <= y] estimates -F0
    }
    if (k + 1 == n || d.outcome()[order[k + 1]] != d.outcome()[i]) {
      values.push_back(d.outcome()[i]);
      c1.push_back(static_cast<double>(a1));
      c0.push_back(static_cast<double>(a0));
    }
  }

  std::vector<std::size_t> keep(values.size());
  std::iota(keep.begin(), keep.end(), 0);
  if (values.size() > opts.max_grid && opts.max_grid >= 2) {
    keep.resize(opts.max_grid);
    const double step = static_cast<double>(values.size() - 1) / static_cast<double>(opts.max_grid - 1);
    for (std::size_t j = 0; j < opts.max_grid; ++j) keep[j] = static_cast<std::size_t>(std::llround(step * static_cast<double>(j)));
  }
  for (std::size_t j : keep) {
    out.grid.push_back(values[j]);
    out.F1_raw.push_back(c1[j]);
    out.F0_raw.push_back(c0[j]);
  }

  auto monotonize = [&](const std::vector<double>& raw) {
    std::vector<double> F(raw.size());
    double run = 0.0;
    for (std::size_t j = 0; j < raw.size(); ++j) {
      const double clamped = std::clamp(raw[j], 0.0, 1.0);
      run = std::max(run, clamped);
      F[j] = run;
      if (std::abs(run - raw[j]) > 1e-12) out.projected = true;
    }
    return F;
  };
  out.F1 = monotonize(out.F1_raw);
  out.F0 = monotonize(out.F0_raw);

  const double f1 = at_zero(out.grid, out.F1);
  const double f0 = at_zero(out.grid, out.F0);
  if (f0 >= f1) {
    out.direction = Direction::TreatedRetains;
    out.shares = {1.0 - f0, f0 - f1, f1};
  } else {
    out.direction = Direction::ControlRetains;
    out.shares = {1.0 - f1, f1 - f0, f0};
  }
  return out;
}

namespace {

// Average of m(F^{-1}(u)) over u in [a, b].
class InverseMean {
 public:
  InverseMean(const ComplierCdfs& c, int arm, OutcomeScale s) : c_(c), arm_(arm), s_(s) {}

  double quadrature(double a, double b) const {
    const auto& F = arm_ ? c_.F1 : c_.F0;
    double total = 0.0;
    double prev = 0.0;
    for (std::size_t j = 0; j < F.size(); ++j) {
      const double top = j + 1 == F.size() ? 1.0 : F[j];
      const double len = std::min(top, b) - std::max(prev, a);
      prev = top;
      if (len <= 0.0) continue;
      total += len * value(c_.grid[j], len);
    }
    return total / (b - a);
  }

  struct Mc {
    double mean = 0.0;
    double se = 0.0;
  };

  Mc monte_carlo(double a, double b, std::size_t draws, std::uint64_t seed, std::uint64_t term, unsigned threads) const {
    constexpr std::size_t kBlock = 4096;
    const std::size_t blocks = (draws + kBlock - 1) / kBlock;
    std::vector<double> sum(blocks), sumsq(blocks);
    parallel_for(blocks, threads, [&](std::size_t blk) {
      Philox rng(seed, (term << 40) | blk);
      const std::size_t count = std::min(kBlock, draws - blk * kBlock);
      double s = 0.0, ss = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const double u = a + (b - a) * rng.uniform();
        const double v = value(c_.inverse(arm_, u), 1.0);
        s += v;
        ss += v * v;
      }
      sum[blk] = s;
      sumsq[blk] = ss;
    });
    double s = 0.0, ss = 0.0;
    for (std::size_t blk = 0; blk < blocks; ++blk) {
      s += sum[blk];
      ss += sumsq[blk];
    }
    const auto m = static_cast<double>(draws);
    Mc r;
    r.mean = s / m;
    r.se = std::sqrt(std::max(0.0, ss / m - r.mean * r.mean) / m);
    return r;
  }

 private:
  double value(double y, double len) const {
    if (s_ == OutcomeScale::Levels) return y;
    if (y > 0.0) return std::log(y);
    if (len < 1e-12) return 0.0;  // rounding sliver at the zero step
    throw Error(ErrorKind::DomainError, "log bounds reach the zero outcome step");
  }

  const ComplierCdfs& c_;
  int arm_;
  OutcomeScale s_;
};

}  // namespace

BoundsResult iv_lee_bounds(const ComplierCdfs& cdfs, const IvBoundsOptions& opts) {
  const auto& sh = cdfs.shares;
  if (!(sh.always > 0.0)) throw Error(ErrorKind::NoAlwaysTakers, "no always-positive compliers");
  const double f1 = at_zero(cdfs.grid, cdfs.F1);
  const double f0 = at_zero(cdfs.grid, cdfs.F0);
  BoundsResult r;
  r.scale = opts.scale;
  r.direction = cdfs.direction;
  r.n = cdfs.n;
  r.trim_fraction = sh.complier / (sh.complier + sh.always);

  const bool treated_trimmed = cdfs.direction == Direction::TreatedRetains;
  const int trim_arm = treated_trimmed ? 1 : 0;
  const double z_trim = treated_trimmed ? f1 : f0;  // start of the trimmed arm's positive mass
  const double z_keep = treated_trimmed ? f0 : f1;
  const InverseMean trimmed(cdfs, trim_arm, opts.scale);
  const InverseMean kept(cdfs, 1 - trim_arm, opts.scale);

  // low: [z_trim, z_trim + AT]; high: [1 - AT, 1]; other arm: [z_keep, 1]
  const double low_a = z_trim, low_b = z_trim + sh.always;
  const double high_a = 1.0 - sh.always;
  double t_low, t_high, other;
  double se_low = 0.0, se_high = 0.0, se_other = 0.0;
  if (opts.mode == IntegrationMode::Quadrature) {
    t_low = trimmed.quadrature(low_a, low_b);
    t_high = trimmed.quadrature(high_a, 1.0);
    other = kept.quadrature(z_keep, 1.0);
  } else {
    if (opts.draws < 2) throw Error(ErrorKind::InvalidConfig, "Monte Carlo mode needs at least 2 draws");
    const auto l = trimmed.monte_carlo(low_a, low_b, opts.draws, opts.seed, 1, opts.threads);
    const auto h = trimmed.monte_carlo(high_a, 1.0, opts.draws, opts.seed, 2, opts.threads);
    const auto o = kept.monte_carlo(z_keep, 1.0, opts.draws, opts.seed, 3, opts.threads);
    t_low = l.mean, t_high = h.mean, other = o.mean;
    se_low = l.se, se_high = h.se, se_other = o.se;
  }
  if (treated_trimmed) {
    r.lower = t_low - other;
    r.upper = t_high - other;
  } else {
    r.lower = other - t_high;
    r.upper = other - t_low;
    std::swap(se_low, se_high);
  }
  r.mc_se_lower = std::sqrt(se_low * se_low + se_other * se_other);
  r.mc_se_upper = std::sqrt(se_high * se_high + se_other * se_other);
  return r;
}

BoundsResult iv_lee_bounds(const Dataset& d, const IvBoundsOptions& opts, const ComplierOptions& copts,
                           const std::optional<BootstrapSpec>& boot) {
  BoundsResult r = iv_lee_bounds(complier_cdfs(d, copts), opts);
  if (boot) {
    IvBoundsOptions inner = opts;
    inner.threads = 1;
    const auto b = cluster_bootstrap(
        d, VectorStatistic([&](const Dataset& s) {
          const auto x = iv_lee_bounds(complier_cdfs(s, copts), inner);
          return std::vector<double>{x.lower, x.upper};
        }),
        *boot);
    r.se_lower = b[0].se;
    r.se_upper = b[1].se;
    r.bootstrap_draws = b.draws;
  }
  return r;
}

namespace {

struct ComplierRatio {
  double late = 0.0;
  double control_mean = 0.0;
  double se = 0.0;
  double first_stage_t = 0.0;
};

ComplierRatio complier_ratio(const Dataset& d, const InferenceOptions& inf) {
  if (!d.has_instrument()) throw Error(ErrorKind::MissingInstrument, "complier ATE% needs an instrument column");
  d.require_binary_treatment();
  const std::size_t n = d.rows();
  const TslsSolver solver(DesignMatrix::constant_only(n), d.treatment(), d.instrument(), VcovSpec::hc0());
  const Eigen::VectorXd w = solver.endogenous_weights();
  std::vector<double> y0(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = (1.0 - d.treatment()[i]) * d.outcome()[i];
  const auto f1 = solver.fit(d.outcome());
  const auto f0 = solver.fit(y0);
  ComplierRatio r;
  r.first_stage_t = solver.first_stage_t();
  r.late = f1.coef(1);
  r.control_mean = -f0.coef(1);  // outcome -(D - 1) Y
  if (!(r.control_mean > 0.0)) throw Error(ErrorKind::ZeroComplierControlMean, "complier control mean is not positive");

  // Influence of each coefficient is w_i e_i; delta method on late / control_mean.
  const double g1 = 1.0 / r.control_mean;
  const double g0 = r.late / (r.control_mean * r.control_mean);  // d/d(coef0) of late / (-coef0)
  const VcovSpec v = vcov_for(d, inf);
  std::map<int, double> by_cluster;
  double var = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double psi = w(static_cast<Eigen::Index>(i)) * (g1 * f1.residuals(static_cast<Eigen::Index>(i)) +
                                                          g0 * f0.residuals(static_cast<Eigen::Index>(i)));
    if (v.kind == VcovKind::Cluster) {
      by_cluster[v.cluster[i]] += psi;
    } else {
      var += psi * psi;
    }
  }
  for (const auto& [g, s] : by_cluster) var += s * s;
  const auto G = static_cast<double>(by_cluster.size());
  if (v.small_sample) var *= v.kind == VcovKind::Cluster ? G / (G - 1.0) : static_cast<double>(n) / static_cast<double>(n - 2);
  r.se = std::sqrt(var);
  return r;
}

}  // namespace

EstimateResult iv_complier_ate_pct(const Dataset& d, const std::optional<BootstrapSpec>& boot,
                                   const InferenceOptions& inf) {
  const auto c = complier_ratio(d, inf);
  double se = c.se;
  if (boot) {
    const auto b = cluster_bootstrap(d, Statistic([&](const Dataset& s) {
                                       const auto x = complier_ratio(s, inf);
                                       return x.late / x.control_mean;
                                     }),
                                     *boot);
    se = b[0].se;
  }
  auto r = EstimateResult::make(c.late / c.control_mean, se, d.rows(), "iv_complier_ate_pct", "identity");
  r.meta["late"] = c.late;
  r.meta["complier_control_mean"] = c.control_mean;
  r.meta["first_stage_t"] = c.first_stage_t;
  r.meta["se_delta"] = c.se;
  if (boot) r.meta["bootstrap_draws"] = static_cast<double>(boot->draws);
  return r;
}

}  // namespace zeroeff
