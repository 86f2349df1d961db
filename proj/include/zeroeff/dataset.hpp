#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace zeroeff {

enum class Role { Outcome, Treatment, Instrument, Post, Group, Covariate, Cluster, RelativeTime };

/// Maps CSV header names to roles. Outcome and treatment are mandatory.
class ColumnSpec {
 public:
  ColumnSpec() = default;
  ColumnSpec(std::string outcome, std::string treatment);

  ColumnSpec& outcome(std::string name);
  ColumnSpec& treatment(std::string name);
  ColumnSpec& instrument(std::string name);
  ColumnSpec& post(std::string name);
  ColumnSpec& group(std::string name);
  ColumnSpec& cluster(std::string name);
  ColumnSpec& relative_time(std::string name);
  ColumnSpec& covariate(std::string name);

  /// Throws DuplicateRole / MissingColumn when the map is not usable.
  void validate() const;

  const std::vector<std::pair<std::string, Role>>& entries() const { return entries_; }
  std::optional<std::string> name_of(Role role) const;
  std::vector<std::string> covariate_names() const;

 private:
  ColumnSpec& set_unique(Role role, std::string name);
  std::vector<std::pair<std::string, Role>> entries_;
};

/// Raw columns used to build a Dataset. Optional columns are empty when absent.
struct DatasetColumns {
  std::vector<double> outcome;
  std::vector<double> treatment;
  std::vector<double> instrument;
  std::vector<double> post;
  std::vector<double> group;
  std::vector<int> relative_time;
  std::vector<int> cluster;
  Eigen::MatrixXd covariates;  // n x k, k may be 0
  std::vector<std::string> covariate_names;
};

/// Immutable, validated column-oriented sample.
class Dataset {
 public:
  explicit Dataset(DatasetColumns columns);

  std::size_t rows() const { return cols_.outcome.size(); }
  std::span<const double> outcome() const { return cols_.outcome; }
  std::span<const double> treatment() const { return cols_.treatment; }
  std::span<const double> instrument() const { return cols_.instrument; }
  std::span<const double> post() const { return cols_.post; }
  std::span<const double> group() const { return cols_.group; }
  std::span<const int> relative_time() const { return cols_.relative_time; }
  std::span<const int> cluster() const { return cols_.cluster; }
  const Eigen::MatrixXd& covariates() const { return cols_.covariates; }
  const std::vector<std::string>& covariate_names() const { return cols_.covariate_names; }

  bool has_instrument() const { return !cols_.instrument.empty(); }
  bool has_post() const { return !cols_.post.empty(); }
  bool has_group() const { return !cols_.group.empty(); }
  bool has_relative_time() const { return !cols_.relative_time.empty(); }
  bool has_cluster() const { return !cols_.cluster.empty(); }
  std::size_t covariate_count() const { return static_cast<std::size_t>(cols_.covariates.cols()); }
  /// Number of distinct cluster ids (0 when there is no cluster column).
  std::size_t cluster_count() const { return cluster_count_; }

  /// Throws NonBinaryColumn unless treatment is exactly {0,1}-valued.
  void require_binary_treatment() const;
  /// Throws when post/group are missing or not binary.
  void require_did_columns() const;

  /// Dataset with a replaced outcome column; everything else is shared by value.
  Dataset with_outcome(std::vector<double> outcome) const;
  /// Row subset in the given order; duplicates allowed (bootstrap resamples).
  Dataset select_rows(std::span<const std::size_t> rows) const;
  /// Row subset with replacement cluster ids (one per selected row).
  Dataset select_rows(std::span<const std::size_t> rows, std::vector<int> cluster) const;

  const DatasetColumns& columns() const { return cols_; }

  friend bool operator==(const Dataset& a, const Dataset& b);

 private:
  DatasetColumns cols_;
  std::size_t cluster_count_ = 0;
};

Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& spec);
Dataset parse_csv(std::string_view text, const ColumnSpec& spec);

/// Multiplies every outcome by a > 0.
Dataset rescale_outcome(const Dataset& d, double a);

/// Relabels arbitrary string ids to dense integers in order of first appearance.
std::vector<int> dense_ids(std::span<const std::string> raw);

}  // namespace zeroeff
