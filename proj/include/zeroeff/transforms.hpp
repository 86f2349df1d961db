#pragma once

#include "zeroeff/dataset.hpp"

#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace zeroeff {

enum class TransformKind {
  Identity,
  Log,
  Log1p,
  Arcsinh,
  LogC,
  CalibratedLog,
  IndicatorPositive,
  Threshold,
  Rank,
};

/// An outcome map m(.) evaluated as m(scale * y).
///
/// CalibratedLog sends 0 to -x and y > 0 to log(y / y_min); it is only
/// monotone when no positive input falls inside (0, y_min * exp(-x)), which
/// apply() checks per value. Rank is the right-continuous empirical CDF of a
/// reference sample (ties count as <=).
class Transform {
 public:
  static Transform identity();
  static Transform log();
  static Transform log1p();
  static Transform arcsinh();
  static Transform log_c(double c);
  static Transform calibrated_log(double x, double y_min);
  static Transform indicator_positive();
  static Transform threshold(double y);
  static Transform rank(std::vector<double> reference);

  /// Same map with the outcome pre-multiplied by a.
  Transform with_scale(double a) const;

  double apply(double y) const;

  TransformKind kind() const { return kind_; }
  double scale() const { return scale_; }
  double shift() const { return c_; }
  double zero_value() const { return x_; }
  double y_min() const { return y_min_; }
  double cutoff() const { return cutoff_; }
  std::span<const double> reference() const;

  /// Config-style name, e.g. "arcsinh", "logc:c=0.5", "calibrated:x=0.1".
  std::string name() const;

 private:
  Transform(TransformKind kind) : kind_(kind) {}

  TransformKind kind_;
  double scale_ = 1.0;
  double c_ = 0.0;
  double x_ = 0.0;
  double y_min_ = 1.0;
  double cutoff_ = 0.0;
  std::shared_ptr<const std::vector<double>> reference_;
};

/// Numerically stable arcsinh via log(y + sqrt(1 + y^2)).
double arcsinh_log_form(double y);

/// Parses the config spellings: identity, log, log1p, arcsinh, logc:c=...,
/// calibrated:x=...[,y_min=...], indicator, threshold:y=..., rank.
/// Calibrated without y_min and rank without a reference need data; pass it
/// via `outcome` (min positive outcome / pooled reference respectively).
Transform parse_transform(std::string_view spec, std::span<const double> outcome = {});

/// Elementwise apply over the outcome column; errors carry the row index.
std::vector<double> transform_column(const Dataset& d, const Transform& t);
std::vector<double> transform_values(std::span<const double> y, const Transform& t);

/// Smallest strictly positive value; throws NoPositiveOutcomes when none.
double min_positive(std::span<const double> y);

}  // namespace zeroeff
