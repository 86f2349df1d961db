#include "zeroeff/dataset.hpp"

#include "zeroeff/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

namespace zeroeff {

// ---------------------------------------------------------------------------
// ColumnSpec
// ---------------------------------------------------------------------------

ColumnSpec::ColumnSpec(std::string outcome_name, std::string treatment_name) {
  outcome(std::move(outcome_name));
  treatment(std::move(treatment_name));
}

ColumnSpec& ColumnSpec::set_unique(Role role, std::string name) {
  for (const auto& [existing, r] : entries_) {
    if (existing == name) {
      throw Error(ErrorKind::DuplicateRole, "column '" + name + "' already mapped to a role");
    }
    if (r == role && role != Role::Covariate) {
      throw Error(ErrorKind::DuplicateRole, "role already assigned to column '" + existing + "'");
    }
  }
  entries_.emplace_back(std::move(name), role);
  return *this;
}

ColumnSpec& ColumnSpec::outcome(std::string name) { return set_unique(Role::Outcome, std::move(name)); }
ColumnSpec& ColumnSpec::treatment(std::string name) { return set_unique(Role::Treatment, std::move(name)); }
ColumnSpec& ColumnSpec::instrument(std::string name) { return set_unique(Role::Instrument, std::move(name)); }
ColumnSpec& ColumnSpec::post(std::string name) { return set_unique(Role::Post, std::move(name)); }
ColumnSpec& ColumnSpec::group(std::string name) { return set_unique(Role::Group, std::move(name)); }
ColumnSpec& ColumnSpec::cluster(std::string name) { return set_unique(Role::Cluster, std::move(name)); }
ColumnSpec& ColumnSpec::relative_time(std::string name) {
  return set_unique(Role::RelativeTime, std::move(name));
}
ColumnSpec& ColumnSpec::covariate(std::string name) { return set_unique(Role::Covariate, std::move(name)); }

void ColumnSpec::validate() const {
  if (!name_of(Role::Outcome)) throw Error(ErrorKind::MissingColumn, "no column mapped to role 'outcome'");
  if (!name_of(Role::Treatment)) throw Error(ErrorKind::MissingColumn, "no column mapped to role 'treatment'");
}

std::optional<std::string> ColumnSpec::name_of(Role role) const {
  for (const auto& [name, r] : entries_) {
    if (r == role) return name;
  }
  return std::nullopt;
}

std::vector<std::string> ColumnSpec::covariate_names() const {
  std::vector<std::string> out;
  for (const auto& [name, r] : entries_) {
    if (r == Role::Covariate) out.push_back(name);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

namespace {

void check_length(std::size_t n, std::size_t got, const char* what) {
  if (got != 0 && got != n) {
    throw Error(ErrorKind::DimensionMismatch,
                std::string(what) + " has " + std::to_string(got) + " rows, outcome has " + std::to_string(n));
  }
}

void check_binary(std::span<const double> col, const char* what) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (col[i] != 0.0 && col[i] != 1.0) {
      throw Error(ErrorKind::NonBinaryColumn,
                  std::string(what) + " is not {0,1}-valued at row " + std::to_string(i));
    }
  }
}

void check_finite(std::span<const double> col, const char* what) {
  for (std::size_t i = 0; i < col.size(); ++i) {
    if (!std::isfinite(col[i])) {
      throw Error(ErrorKind::NonFiniteInput, std::string(what) + " not finite at row " + std::to_string(i));
    }
  }
}

}  // namespace

Dataset::Dataset(DatasetColumns columns) : cols_(std::move(columns)) {
  const std::size_t n = cols_.outcome.size();
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "dataset has no rows");
  if (cols_.treatment.size() != n) {
    throw Error(ErrorKind::DimensionMismatch, "treatment length differs from outcome length");
  }
  check_length(n, cols_.instrument.size(), "instrument");
  check_length(n, cols_.post.size(), "post");
  check_length(n, cols_.group.size(), "group");
  check_length(n, cols_.relative_time.size(), "relative_time");
  check_length(n, cols_.cluster.size(), "cluster");
  if (cols_.covariates.size() == 0) cols_.covariates.resize(static_cast<Eigen::Index>(n), 0);
  if (static_cast<std::size_t>(cols_.covariates.rows()) != n) {
    throw Error(ErrorKind::DimensionMismatch, "covariate matrix row count differs from outcome length");
  }
  if (cols_.covariate_names.size() != static_cast<std::size_t>(cols_.covariates.cols())) {
    cols_.covariate_names.resize(static_cast<std::size_t>(cols_.covariates.cols()));
    for (std::size_t j = 0; j < cols_.covariate_names.size(); ++j) {
      if (cols_.covariate_names[j].empty()) cols_.covariate_names[j] = "x" + std::to_string(j);
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    const double y = cols_.outcome[i];
    if (!std::isfinite(y)) throw Error(ErrorKind::NonFiniteInput, "outcome not finite at row " + std::to_string(i));
    if (y < 0.0) throw Error(ErrorKind::NegativeOutcome, "outcome negative at row " + std::to_string(i));
  }
  check_finite(cols_.treatment, "treatment");
  check_finite(cols_.instrument, "instrument");
  check_finite(cols_.post, "post");
  check_finite(cols_.group, "group");
  if (!cols_.covariates.allFinite()) throw Error(ErrorKind::NonFiniteInput, "covariates contain non-finite values");

  if (!cols_.cluster.empty()) {
    std::vector<int> ids = cols_.cluster;
    std::sort(ids.begin(), ids.end());
    cluster_count_ = static_cast<std::size_t>(std::unique(ids.begin(), ids.end()) - ids.begin());
  }
}

void Dataset::require_binary_treatment() const { check_binary(cols_.treatment, "treatment"); }

void Dataset::require_did_columns() const {
  if (!has_post()) throw Error(ErrorKind::MissingColumn, "post");
  if (!has_group()) throw Error(ErrorKind::MissingColumn, "group");
  check_binary(cols_.post, "post");
  check_binary(cols_.group, "group");
}

Dataset Dataset::with_outcome(std::vector<double> outcome) const {
  DatasetColumns c = cols_;
  c.outcome = std::move(outcome);
  return Dataset(std::move(c));
}

namespace {

template <typename T>
std::vector<T> gather(const std::vector<T>& src, std::span<const std::size_t> rows) {
  if (src.empty()) return {};
  std::vector<T> out;
  out.reserve(rows.size());
  for (std::size_t r : rows) out.push_back(src[r]);
  return out;
}

}  // namespace

Dataset Dataset::select_rows(std::span<const std::size_t> rows) const {
  return select_rows(rows, gather(cols_.cluster, rows));
}

Dataset Dataset::select_rows(std::span<const std::size_t> rows, std::vector<int> cluster) const {
  for (std::size_t r : rows) {
    if (r >= this->rows()) throw Error(ErrorKind::DimensionMismatch, "row index out of range");
  }
  DatasetColumns c;
  c.outcome = gather(cols_.outcome, rows);
  c.treatment = gather(cols_.treatment, rows);
  c.instrument = gather(cols_.instrument, rows);
  c.post = gather(cols_.post, rows);
  c.group = gather(cols_.group, rows);
  c.relative_time = gather(cols_.relative_time, rows);
  c.cluster = std::move(cluster);
  c.covariates.resize(static_cast<Eigen::Index>(rows.size()), cols_.covariates.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    c.covariates.row(static_cast<Eigen::Index>(i)) = cols_.covariates.row(static_cast<Eigen::Index>(rows[i]));
  }
  c.covariate_names = cols_.covariate_names;
  return Dataset(std::move(c));
}

bool operator==(const Dataset& a, const Dataset& b) {
  const auto& x = a.cols_;
  const auto& y = b.cols_;
  return x.outcome == y.outcome && x.treatment == y.treatment && x.instrument == y.instrument &&
         x.post == y.post && x.group == y.group && x.relative_time == y.relative_time &&
         x.cluster == y.cluster && x.covariates.rows() == y.covariates.rows() &&
         x.covariates.cols() == y.covariates.cols() && x.covariates == y.covariates &&
         x.covariate_names == y.covariate_names;
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

double parse_number(std::string_view raw, const std::string& column, std::size_t row) {
  std::string_view s = trim(raw);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    throw Error(ErrorKind::NonNumericCell,
                "column '" + column + "' row " + std::to_string(row) + ": '" + std::string(raw) + "'");
  }
  return value;
}

int parse_integer(std::string_view raw, const std::string& column, std::size_t row) {
  const double v = parse_number(raw, column, row);
  if (v != std::floor(v) || std::fabs(v) > 1e9) {
    throw Error(ErrorKind::NonNumericCell,
                "column '" + column + "' row " + std::to_string(row) + ": expected an integer");
  }
  return static_cast<int>(v);
}

}  // namespace

std::vector<int> dense_ids(std::span<const std::string> raw) {
  std::unordered_map<std::string, int> index;
  std::vector<int> out;
  out.reserve(raw.size());
  for (const auto& s : raw) {
    auto [it, inserted] = index.try_emplace(s, static_cast<int>(index.size()));
    out.push_back(it->second);
  }
  return out;
}

Dataset parse_csv(std::string_view text, const ColumnSpec& spec) {
  spec.validate();

  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  // leading '#' lines carry provenance
  std::size_t skip = 0;
  while (skip < lines.size() && !lines[skip].empty() && lines[skip].front() == '#') ++skip;
  lines.erase(lines.begin(), lines.begin() + static_cast<std::ptrdiff_t>(skip));
  // Strip trailing blank lines only; interior blank lines are malformed rows.
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  if (lines.empty()) throw Error(ErrorKind::EmptyDataset, "file has no header row");

  std::string_view header_line = lines.front();
  if (header_line.size() >= 3 && header_line.substr(0, 3) == "\xEF\xBB\xBF") header_line.remove_prefix(3);
  std::vector<std::string> header = split_record(header_line);
  for (auto& h : header) h = std::string(trim(h));

  std::unordered_map<std::string, std::size_t> position;
  for (std::size_t j = 0; j < header.size(); ++j) position.emplace(header[j], j);

  for (const auto& [name, role] : spec.entries()) {
    if (!position.count(name)) throw Error(ErrorKind::MissingColumn, name);
  }

  const std::size_t n = lines.size() - 1;
  if (n == 0) throw Error(ErrorKind::EmptyDataset, "file has a header but no data rows");

  const auto covariate_names = spec.covariate_names();
  DatasetColumns c;
  c.covariates.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(covariate_names.size()));
  c.covariate_names = covariate_names;
  std::vector<std::string> raw_cluster;

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = i + 1;  // 1-based data row, header excluded
    std::vector<std::string> fields = split_record(lines[i + 1]);
    if (fields.size() != header.size()) {
      throw Error(ErrorKind::NonNumericCell, "row " + std::to_string(row) + " has " +
                                                 std::to_string(fields.size()) + " fields, header has " +
                                                 std::to_string(header.size()));
    }
    std::size_t cov = 0;
    for (const auto& [name, role] : spec.entries()) {
      const std::string& cell = fields[position.at(name)];
      switch (role) {
        case Role::Outcome: {
          const double y = parse_number(cell, name, row);
          if (y < 0.0) {
            throw Error(ErrorKind::NegativeOutcome, "column '" + name + "' row " + std::to_string(row));
          }
          c.outcome.push_back(y);
          break;
        }
        case Role::Treatment: c.treatment.push_back(parse_number(cell, name, row)); break;
        case Role::Instrument: c.instrument.push_back(parse_number(cell, name, row)); break;
        case Role::Post: c.post.push_back(parse_number(cell, name, row)); break;
        case Role::Group: c.group.push_back(parse_number(cell, name, row)); break;
        case Role::RelativeTime: c.relative_time.push_back(parse_integer(cell, name, row)); break;
        case Role::Covariate:
          c.covariates(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(cov++)) =
              parse_number(cell, name, row);
          break;
        case Role::Cluster: {
          std::string id(trim(cell));
          if (id.empty()) {
            throw Error(ErrorKind::NonNumericCell,
                        "column '" + name + "' row " + std::to_string(row) + ": missing cluster id");
          }
          raw_cluster.push_back(std::move(id));
          break;
        }
      }
    }
  }
  if (!raw_cluster.empty()) c.cluster = dense_ids(raw_cluster);
  return Dataset(std::move(c));
}

Dataset load_csv(const std::filesystem::path& path, const ColumnSpec& spec) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::FileNotFound, "cannot open file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), spec);
}

Dataset rescale_outcome(const Dataset& d, double a) {
  if (!(a > 0.0) || !std::isfinite(a)) {
    throw Error(ErrorKind::NonPositiveScale, "scale must be positive and finite");
  }
  std::vector<double> y(d.outcome().begin(), d.outcome().end());
  for (double& v : y) v *= a;
  return d.with_outcome(std::move(y));
}

}  // namespace zeroeff
