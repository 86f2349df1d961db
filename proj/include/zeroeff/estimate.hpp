#pragma once

#include "zeroeff/dataset.hpp"
#include "zeroeff/regression.hpp"

#include <cstddef>
#include <map>
#include <string>

namespace zeroeff {

/// Shared estimator output: point estimate, standard error, t-stat and tags.
struct EstimateResult {
  double value = 0.0;
  double se = 0.0;
  double tstat = 0.0;  // value / se, NaN when se == 0
  std::size_t n = 0;
  std::string estimator;
  std::string transform;
  std::map<std::string, double> meta;  // e.g. y_min, bootstrap draws, seed

  static EstimateResult make(double value, double se, std::size_t n, std::string estimator,
                             std::string transform = {});
};

/// Standard-error settings shared by every estimator.
struct InferenceOptions {
  bool cluster = true;        // use the dataset's cluster column when present
  bool small_sample = false;  // HC1 / G/(G-1)
};

/// Cluster sandwich when requested and available, otherwise HC0.
VcovSpec vcov_for(const Dataset& d, const InferenceOptions& opts = {});

/// OLS engines for treatment effects: difference in means, or the same
/// regression with the dataset's covariates added.
enum class Engine { DiffMeans, Covariates };

std::string to_string(Engine e);
Engine parse_engine(const std::string& s);

/// [1, D] or [1, D, covariates]; the treatment coefficient is column 1.
DesignMatrix treatment_design(const Dataset& d, Engine e);

/// [1, G x Post, G, Post] (+ covariates): the DiD interaction is column 1.
DesignMatrix did_design(const Dataset& d, bool covariates);

}  // namespace zeroeff
