#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace zeroeff {

/// Shortest round-trip decimal form; "nan", "inf" and "-inf" for non-finite.
std::string format_double(double v);

/// Minimal CSV writer: quotes fields containing separators or quotes.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  void add_row(std::span<const double> values);

  std::string str() const;
  std::size_t rows() const { return rows_.size(); }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// Writes text atomically enough for batch use (truncate + write).
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace zeroeff
