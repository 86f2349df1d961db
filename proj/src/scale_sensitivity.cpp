#include "zeroeff/scale_sensitivity.hpp"

#include "zeroeff/error.hpp"
#include "zeroeff/io.hpp"
#include "zeroeff/parallel.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>

namespace zeroeff {

namespace {

// One factorisation shared by every scale.
class ThetaEngine {
 public:
  ThetaEngine(const Dataset& d, const Transform& t, const SensitivityOptions& opts)
      : d_(d), t_(t), opts_(opts), solver_(treatment_design(d, opts.engine), vcov_for(d, opts.inference)) {
    d.require_binary_treatment();
  }

  EstimateResult at(double a) const {
    if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::NonPositiveScale, "scale a must be positive");
    const Transform m = t_.with_scale(t_.scale() * a);
    const auto y = transform_values(d_.outcome(), m);
    for (double v : y) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "m(a y) overflows at a = " + format_double(a));
    }
    return fit(y, m.name());
  }

  EstimateResult extensive() const {
    return fit(transform_values(d_.outcome(), Transform::indicator_positive()), "indicator");
  }

 private:
  EstimateResult fit(const std::vector<double>& y, std::string tag) const {
    const FitResult f = solver_.fit(y);
    return EstimateResult::make(f.coef(1), f.stderr_of(1), d_.rows(), to_string(opts_.engine), std::move(tag));
  }

  const Dataset& d_;
  Transform t_;
  SensitivityOptions opts_;
  OlsSolver solver_;
};

}  // namespace

EstimateResult theta_at(const Dataset& d, const Transform& t, double a, const SensitivityOptions& opts) {
  return ThetaEngine(d, t, opts).at(a);
}

EstimateResult extensive_margin(const Dataset& d, const SensitivityOptions& opts) {
  return ThetaEngine(d, Transform::indicator_positive(), opts).extensive();
}

std::vector<double> log_grid(double lo, double hi, std::size_t points) {
  if (!(lo > 0.0) || !(hi > lo) || points < 2) {
    throw Error(ErrorKind::InvalidConfig, "log grid needs 0 < lo < hi and at least 2 points");
  }
  std::vector<double> g(points);
  const double l0 = std::log10(lo);
  const double step = (std::log10(hi) - l0) / static_cast<double>(points - 1);
  for (std::size_t i = 0; i < points; ++i) g[i] = std::pow(10.0, l0 + step * static_cast<double>(i));
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> default_grid() { return log_grid(1e-4, 1e8, 25); }

SensitivityCurve sensitivity_curve(const Dataset& d, const Transform& t, const std::vector<double>& grid,
                                   const SensitivityOptions& opts) {
  if (grid.empty()) throw Error(ErrorKind::InvalidConfig, "sensitivity grid is empty");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!(grid[i] > 0.0) || !std::isfinite(grid[i])) throw Error(ErrorKind::NonPositiveScale, "grid values must be positive");
    if (i && !(grid[i] > grid[i - 1])) throw Error(ErrorKind::InvalidConfig, "grid must be strictly increasing");
  }
  const ThetaEngine engine(d, t, opts);
  SensitivityCurve c;
  c.grid = grid;
  c.theta.resize(grid.size());
  c.se.resize(grid.size());
  c.tstat.resize(grid.size());
  c.transform_kind = t.kind();
  c.transform_name = t.name();
  parallel_for(grid.size(), opts.threads, [&](std::size_t i) {
    const auto r = engine.at(grid[i]);
    c.theta[i] = r.value;
    c.se[i] = r.se;
    c.tstat[i] = r.tstat;
  });
  c.extensive_margin = engine.extensive();

  std::size_t k = grid.size() - 1;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (grid[i] >= 1.0) {
      k = i;
      break;
    }
  }
  c.anchor = grid[k];
  c.approx.resize(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    c.approx[i] = c.theta[k] + c.extensive_margin.value * std::log(grid[i] / c.anchor);
  }
  return c;
}

double log_slope(const SensitivityCurve& c, double lo, double hi) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int m = 0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    if (c.grid[i] < lo || c.grid[i] > hi) continue;
    const double x = std::log(c.grid[i]);
    sx += x;
    sy += c.theta[i];
    sxx += x * x;
    sxy += x * c.theta[i];
    ++m;
  }
  if (m < 2) throw Error(ErrorKind::InvalidConfig, "slope needs at least two grid points in range");
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

ScaleSearch find_scale_for_target(const Dataset& d, const Transform& t, double target, const SensitivityOptions& opts,
                                  const SearchOptions& search) {
  if (!(target > 0.0) || !std::isfinite(target)) throw Error(ErrorKind::DomainError, "target must be positive");
  const ThetaEngine engine(d, t, opts);
  const double gamma = engine.extensive().value;
  if (!(std::abs(gamma) > search.zero_margin)) {
    throw Error(ErrorKind::NoExtensiveMargin, "extensive-margin estimate is zero; |theta(a)| stays bounded");
  }

  ScaleSearch s;
  auto magnitude = [&](double a) {
    try {
      return std::abs(engine.at(a).value);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::NonFiniteInput) {
        throw Error(ErrorKind::BracketNotFound, "target not bracketed before m(a y) overflows");
      }
      throw;
    }
  };
  auto done = [&](double a) {
    s.a = a;
    s.theta = engine.at(a).value;
    return s;
  };

  double lo = 1.0, hi = 1.0;
  const double m1 = magnitude(1.0);
  if (std::abs(m1 - target) < search.tolerance) return done(1.0);
  if (m1 < target) {
    for (;;) {
      hi = lo * 10.0;
      if (hi > 1e300) throw Error(ErrorKind::BracketNotFound, "|theta(a)| < target for all a <= 1e300");
      ++s.bracket_steps;
      const double m = magnitude(hi);
      if (std::abs(m - target) < search.tolerance) return done(hi);
      if (m > target) break;
      lo = hi;
    }
  } else {
    for (;;) {
      lo = hi / 10.0;
      if (lo < 1e-300) throw Error(ErrorKind::BracketNotFound, "|theta(a)| > target for all a >= 1e-300");
      ++s.bracket_steps;
      const double m = magnitude(lo);
      if (std::abs(m - target) < search.tolerance) return done(lo);
      if (m < target) break;
      hi = lo;
    }
  }

  double llo = std::log(lo), lhi = std::log(hi);
  for (int it = 1; it <= search.max_bisections; ++it) {
    const double mid = std::exp(0.5 * (llo + lhi));
    s.bisection_steps = it;
    const double m = magnitude(mid);
    if (std::abs(m - target) < search.tolerance) return done(mid);
    (m < target ? llo : lhi) = std::log(mid);
  }
  throw Error(ErrorKind::BracketNotFound, "bisection did not reach the tolerance");
}

TstatTable tstat_table(const Dataset& d, const Transform& t, const std::vector<double>& grid,
                       const SensitivityOptions& opts) {
  const auto c = sensitivity_curve(d, t, grid, opts);
  TstatTable table;
  table.t_gamma = c.extensive_margin.tstat;
  table.convergence_expected = std::abs(c.extensive_margin.value) > 1e-10 && std::isfinite(table.t_gamma);
  for (std::size_t i = 0; i < grid.size(); ++i) table.rows.push_back({grid[i], c.tstat[i], table.t_gamma});
  return table;
}

RescaleSummary rescale_summary(const Dataset& d, const Transform& t, const SensitivityOptions& opts) {
  const ThetaEngine engine(d, t, opts);
  RescaleSummary r;
  r.theta_1 = engine.at(1.0).value;
  r.theta_100 = engine.at(100.0).value;
  r.gamma = engine.extensive().value;
  r.raw_change = r.theta_100 - r.theta_1;
  r.pct_change = r.theta_1 != 0.0 ? 100.0 * r.raw_change / r.theta_1 : std::numeric_limits<double>::quiet_NaN();
  r.predicted_change = r.gamma * std::log(100.0);
  return r;
}

std::string curve_csv(const SensitivityCurve& c) {
  CsvTable table({"a", "theta", "se", "tstat", "approx"});
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    const double row[] = {c.grid[i], c.theta[i], c.se[i], c.tstat[i], c.approx[i]};
    table.add_row(row);
  }
  return table.str();
}

std::string curve_json(const SensitivityCurve& c) {
  nlohmann::ordered_json j;
  j["transform"] = c.transform_name;
  j["anchor"] = c.anchor;
  j["extensive_margin"] = {{"value", c.extensive_margin.value},
                           {"se", c.extensive_margin.se},
                           {"tstat", c.extensive_margin.tstat}};
  j["grid"] = c.grid;
  j["theta"] = c.theta;
  j["se"] = c.se;
  j["tstat"] = c.tstat;
  j["approx"] = c.approx;
  return j.dump(2) + "\n";
}

}  // namespace zeroeff
