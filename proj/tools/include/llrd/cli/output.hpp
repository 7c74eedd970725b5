#pragma once

#include <string>
#include <vector>

#include "llrd/cli/spec.hpp"

namespace llrd::cli {

// 12 significant digits, "inf" for +inf. Throws Error on NaN or -inf.
std::string format_number(double v);

// Output filter: returns a copy where +inf becomes "inf" and any NaN or -inf
// raises Error naming the JSON path.
Json sanitize(const Json& doc);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add_row(const std::vector<double>& values, const std::vector<std::string>& text = {});
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& columns() const { return columns_; }
  // Header plus rows, ',' separated, LF terminated.
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a sibling temp file, then renames over the target.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace llrd::cli
