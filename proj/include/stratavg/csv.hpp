#pragma once

// Deterministic CSV tables with a '#'-prefixed metadata header, written atomically.

#include <string>
#include <utility>
#include <vector>

namespace stratavg {

/// Shortest-roundtrip-safe formatting (%.17g); identical input gives identical text.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void meta(const std::string& key, const std::string& value) { meta_.emplace_back(key, value); }
  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);

  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::pair<std::string, std::string>> meta_;
  std::vector<std::string> rows_;
};

/// Writes to a temporary file in the same directory, then renames over `path`.
/// Parent directories are created.
void write_file_atomic(const std::string& path, const std::string& content);

/// Build-time `git describe` string.
const char* git_describe();

}  // namespace stratavg
