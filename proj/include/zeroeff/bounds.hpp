#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/estimate.hpp"
#include "zeroeff/inference.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace zeroeff {

enum class OutcomeScale { Log, Levels };

/// Which arm's positive units include every always-positive unit.
/// TreatedRetains: P(Y(1) = 0, Y(0) > 0) = 0, so the treated positives are
/// trimmed; ControlRetains is the mirror image.
enum class Direction { TreatedRetains, ControlRetains };

std::string to_string(OutcomeScale s);
std::string to_string(Direction d);
OutcomeScale parse_scale(const std::string& s);

struct BoundsResult {
  double lower = 0.0;
  double upper = 0.0;
  double se_lower = 0.0;
  double se_upper = 0.0;
  double trim_fraction = 0.0;
  Direction direction = Direction::TreatedRetains;
  OutcomeScale scale = OutcomeScale::Log;
  std::size_t n = 0;
  std::size_t bootstrap_draws = 0;
  double mc_se_lower = 0.0;  // Monte Carlo error (IV, Monte Carlo mode)
  double mc_se_upper = 0.0;
};

/// Trimming bounds on the always-positive effect. Mass at the cutoff value is
/// split fractionally so exactly the untrimmed share is retained.
BoundsResult lee_bounds(const Dataset& d, OutcomeScale scale = OutcomeScale::Log,
                        const std::optional<BootstrapSpec>& boot = std::nullopt);

/// E[Y | D=1, Y>0] / (theta + (1-c)(1-theta)) - E[Y | D=0, Y>0] with
/// theta = q0 / q1 (mirrored when q0 > q1).
EstimateResult selection_point_estimate(const Dataset& d, double c,
                                        const std::optional<BootstrapSpec>& boot = std::nullopt);

struct ComplierShares {
  double always = 0.0;
  double complier = 0.0;
  double never = 0.0;
};

struct ComplierCdfs {
  std::vector<double> grid;
  std::vector<double> F1;  // clamped, running maximum
  std::vector<double> F0;
  std::vector<double> F1_raw;
  std::vector<double> F0_raw;
  ComplierShares shares;
  Direction direction = Direction::TreatedRetains;
  bool projected = false;  // raw estimates left [0,1] or were non-monotone
  double first_stage_t = 0.0;
  std::size_t n = 0;

  /// inf{y in grid : F(y) >= u}; the top grid point covers u up to 1.
  double inverse(int arm, double u) const;
  double cdf_at(int arm, double y) const;
};

struct ComplierOptions {
  std::size_t max_grid = 10000;
  bool allow_weak = false;  // otherwise |first-stage t| < 2 is an error
  InferenceOptions inference;
};

/// Complier CDFs of Y(1) and Y(0) by TSLS with outcomes D 1[Y <= y] and
/// (1 - D) 1[Y <= y], using one weight vector for every grid point.
ComplierCdfs complier_cdfs(const Dataset& d, const ComplierOptions& opts = {});

enum class IntegrationMode { Quadrature, MonteCarlo };

struct IvBoundsOptions {
  IntegrationMode mode = IntegrationMode::Quadrature;
  std::size_t draws = 100000;
  std::uint64_t seed = 20240101;
  unsigned threads = 1;
  OutcomeScale scale = OutcomeScale::Log;
};

/// Trimming bounds for always-positive instrument-compliers from inverse CDFs.
BoundsResult iv_lee_bounds(const ComplierCdfs& cdfs, const IvBoundsOptions& opts = {});
/// Same from data, with optional bootstrap SEs (CDFs re-estimated per draw).
BoundsResult iv_lee_bounds(const Dataset& d, const IvBoundsOptions& opts, const ComplierOptions& copts = {},
                           const std::optional<BootstrapSpec>& boot = std::nullopt);

/// TSLS level LATE divided by the TSLS complier control mean.
EstimateResult iv_complier_ate_pct(const Dataset& d, const std::optional<BootstrapSpec>& boot = std::nullopt,
                                   const InferenceOptions& inf = {});

}  // namespace zeroeff
