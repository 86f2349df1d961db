#include "zeroeff/transforms.hpp"

#include "zeroeff/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>

namespace zeroeff {

namespace {

constexpr double kArcsinhLargeBranch = 1e8;

std::string format_param(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw Error(ErrorKind::DomainError, std::string(what) + " must be positive and finite");
  }
}

}  // namespace

double arcsinh_log_form(double y) {
  if (y > kArcsinhLargeBranch) {
    // log(y + sqrt(1+y^2)) = log(2y) + log((1 + sqrt(1 + 1/y^2)) / 2)
    const double inv = 1.0 / y;
    return std::log(2.0 * y) + std::log1p(0.5 * (std::sqrt(1.0 + inv * inv) - 1.0));
  }
  // y + sqrt(1+y^2) = 1 + y + y^2 / (1 + sqrt(1+y^2)), evaluated through log1p.
  const double root = std::sqrt(1.0 + y * y);
  return std::log1p(y + y * y / (1.0 + root));
}

Transform Transform::identity() { return Transform(TransformKind::Identity); }
Transform Transform::log() { return Transform(TransformKind::Log); }
Transform Transform::log1p() { return Transform(TransformKind::Log1p); }
Transform Transform::arcsinh() { return Transform(TransformKind::Arcsinh); }

Transform Transform::log_c(double c) {
  require_positive(c, "LogC shift c");
  Transform t(TransformKind::LogC);
  t.c_ = c;
  return t;
}

Transform Transform::calibrated_log(double x, double y_min) {
  if (!(x >= 0.0) || !std::isfinite(x)) {
    throw Error(ErrorKind::DomainError, "calibrated zero value x must be non-negative and finite");
  }
  require_positive(y_min, "calibrated y_min");
  Transform t(TransformKind::CalibratedLog);
  t.x_ = x;
  t.y_min_ = y_min;
  return t;
}

Transform Transform::indicator_positive() { return Transform(TransformKind::IndicatorPositive); }

Transform Transform::threshold(double y) {
  if (!(y >= 0.0) || !std::isfinite(y)) throw Error(ErrorKind::DomainError, "threshold must be >= 0");
  Transform t(TransformKind::Threshold);
  t.cutoff_ = y;
  return t;
}

Transform Transform::rank(std::vector<double> reference) {
  if (reference.empty()) throw Error(ErrorKind::EmptyReference, "rank reference sample is empty");
  for (double v : reference) {
    if (!std::isfinite(v)) throw Error(ErrorKind::NonFiniteInput, "rank reference contains non-finite values");
  }
  std::sort(reference.begin(), reference.end());
  Transform t(TransformKind::Rank);
  t.reference_ = std::make_shared<const std::vector<double>>(std::move(reference));
  return t;
}

Transform Transform::with_scale(double a) const {
  if (!(a > 0.0) || !std::isfinite(a)) throw Error(ErrorKind::NonPositiveScale, "scale must be positive");
  Transform t = *this;
  t.scale_ = a;
  return t;
}

std::span<const double> Transform::reference() const {
  if (!reference_) return {};
  return *reference_;
}

double Transform::apply(double y) const {
  if (!std::isfinite(y)) throw Error(ErrorKind::NonFiniteInput, "outcome value is not finite");
  if (y < 0.0) throw Error(ErrorKind::DomainError, "outcome value is negative");
  const double v = scale_ * y;
  switch (kind_) {
    case TransformKind::Identity: return v;
    case TransformKind::Log:
      if (!(v > 0.0)) throw Error(ErrorKind::DomainError, "log of zero");
      return std::log(v);
    case TransformKind::Log1p: return std::log1p(v);
    case TransformKind::Arcsinh: return arcsinh_log_form(v);
    case TransformKind::LogC: return std::log(c_ + v);
    case TransformKind::CalibratedLog: {
      if (v == 0.0) return -x_;
      const double ratio = v / y_min_;
      if (ratio < std::exp(-x_)) {
        throw Error(ErrorKind::MonotonicityViolation,
                    "positive value " + format_param(v) + " lies below y_min * exp(-x) = " +
                        format_param(y_min_ * std::exp(-x_)));
      }
      return std::log(ratio);
    }
    case TransformKind::IndicatorPositive: return v > 0.0 ? 1.0 : 0.0;
    case TransformKind::Threshold: return v >= cutoff_ ? 1.0 : 0.0;
    case TransformKind::Rank: {
      const auto& ref = *reference_;
      const auto count = std::upper_bound(ref.begin(), ref.end(), v) - ref.begin();
      return static_cast<double>(count) / static_cast<double>(ref.size());
    }
  }
  return std::numeric_limits<double>::quiet_NaN();
}

std::string Transform::name() const {
  std::string base;
  switch (kind_) {
    case TransformKind::Identity: base = "identity"; break;
    case TransformKind::Log: base = "log"; break;
    case TransformKind::Log1p: base = "log1p"; break;
    case TransformKind::Arcsinh: base = "arcsinh"; break;
    case TransformKind::LogC: base = "logc:c=" + format_param(c_); break;
    case TransformKind::CalibratedLog:
      base = "calibrated:x=" + format_param(x_) + ",y_min=" + format_param(y_min_);
      break;
    case TransformKind::IndicatorPositive: base = "indicator"; break;
    case TransformKind::Threshold: base = "threshold:y=" + format_param(cutoff_); break;
    case TransformKind::Rank: base = "rank"; break;
  }
  if (scale_ != 1.0) base += "@a=" + format_param(scale_);
  return base;
}

namespace {

double parse_param_value(std::string_view s, std::string_view spec) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::InvalidConfig, "bad numeric parameter in transform '" + std::string(spec) + "'");
  }
  return v;
}

// Splits "k1=v1,k2=v2" into pairs.
std::vector<std::pair<std::string, double>> parse_params(std::string_view body, std::string_view spec) {
  std::vector<std::pair<std::string, double>> out;
  while (!body.empty()) {
    const auto comma = body.find(',');
    std::string_view item = body.substr(0, comma);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorKind::InvalidConfig, "expected key=value in transform '" + std::string(spec) + "'");
    }
    out.emplace_back(std::string(item.substr(0, eq)), parse_param_value(item.substr(eq + 1), spec));
    if (comma == std::string_view::npos) break;
    body.remove_prefix(comma + 1);
  }
  return out;
}

}  // namespace

Transform parse_transform(std::string_view spec, std::span<const double> outcome) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  std::vector<std::pair<std::string, double>> params;
  if (colon != std::string_view::npos) params = parse_params(spec.substr(colon + 1), spec);
  auto get = [&](std::string_view key) -> std::optional<double> {
    for (const auto& [k, v] : params) {
      if (k == key) return v;
    }
    return std::nullopt;
  };
  auto require = [&](std::string_view key) {
    auto v = get(key);
    if (!v) throw Error(ErrorKind::InvalidConfig, "transform '" + std::string(spec) + "' needs " + std::string(key));
    return *v;
  };

  Transform t = Transform::identity();
  if (head == "identity") t = Transform::identity();
  else if (head == "log") t = Transform::log();
  else if (head == "log1p") t = Transform::log1p();
  else if (head == "arcsinh") t = Transform::arcsinh();
  else if (head == "logc") t = Transform::log_c(require("c"));
  else if (head == "calibrated") {
    const double x = require("x");
    auto y_min = get("y_min");
    t = Transform::calibrated_log(x, y_min ? *y_min : min_positive(outcome));
  } else if (head == "indicator") t = Transform::indicator_positive();
  else if (head == "threshold") t = Transform::threshold(require("y"));
  else if (head == "rank") t = Transform::rank(std::vector<double>(outcome.begin(), outcome.end()));
  else throw Error(ErrorKind::InvalidConfig, "unknown transform '" + std::string(spec) + "'");

  if (auto a = get("a")) t = t.with_scale(*a);
  return t;
}

std::vector<double> transform_values(std::span<const double> y, const Transform& t) {
  std::vector<double> out;
  out.reserve(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) {
    try {
      out.push_back(t.apply(y[i]));
    } catch (const Error& e) {
      throw Error(e.kind(), "row " + std::to_string(i) + ": " + e.what());
    }
  }
  return out;
}

std::vector<double> transform_column(const Dataset& d, const Transform& t) {
  return transform_values(d.outcome(), t);
}

double min_positive(std::span<const double> y) {
  double best = std::numeric_limits<double>::infinity();
  for (double v : y) {
    if (v > 0.0 && v < best) best = v;
  }
  if (!std::isfinite(best)) throw Error(ErrorKind::NoPositiveOutcomes, "no strictly positive outcomes");
  return best;
}

}  // namespace zeroeff
