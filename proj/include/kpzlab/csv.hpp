// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

namespace kpzlab {

// Rows are kept as text so files round-trip exactly. Numbers go through
// format_number, which prints the shortest form that reads back the same.
struct CsvTable {
  std::string config;  // JSON from the "# config: " line, may be empty
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> row);
  std::size_t column(const std::string& name) const;  // throws if absent
  std::vector<double> numbers(const std::string& name) const;
};

std::string format_number(double v);
double parse_number(const std::string& s, const std::string& what);

std::string to_csv(const CsvTable& t);
CsvTable parse_csv(const std::string& text, const std::string& origin);

// "-" is stdout for writing. Reading accepts plain value-per-line files
// too (one unnamed column called "value").
void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(const std::string& path);

void write_text(const std::string& path, const std::string& text);
std::string read_text(const std::string& path);

}  // namespace kpzlab
