// SPDX-License-Identifier: Apache-2.0
#include "kpzlab/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "kpzlab/error.hpp"

namespace kpzlab {

namespace {

const std::string kConfigPrefix = "# config: ";

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void CsvTable::add_row(std::vector<std::string> row) {
  require(row.size() == columns.size(), "row width does not match the header");
  rows.push_back(std::move(row));
}

std::size_t CsvTable::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  fail(ErrorCode::invalid_argument, "no column '" + name + "'");
}

std::vector<double> CsvTable::numbers(const std::string& name) const {
  std::size_t c = column(name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    out.push_back(parse_number(rows[i][c], "row " + std::to_string(i + 1) +
                                               " column " + name));
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_number(const std::string& s, const std::string& what) {
  std::size_t a = s.find_first_not_of(" \t");
  std::size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos)
    fail(ErrorCode::invalid_argument, what + ": empty number");
  std::string v = s.substr(a, b - a + 1);
  if (v == "inf" || v == "+inf") return HUGE_VAL;
  if (v == "-inf") return -HUGE_VAL;
  if (v == "nan") return std::nan("");
  double out = 0;
  const char* first = v.data();
  if (*first == '+') ++first;
  auto res = std::from_chars(first, v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    fail(ErrorCode::invalid_argument, what + ": '" + v + "' is not a number");
  return out;
}

std::string to_csv(const CsvTable& t) {
  std::ostringstream os;
  if (!t.config.empty()) os << kConfigPrefix << t.config << '\n';
  for (std::size_t i = 0; i < t.columns.size(); ++i)
    os << (i ? "," : "") << t.columns[i];
  os << '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

CsvTable parse_csv(const std::string& text, const std::string& origin) {
  CsvTable t;
  std::istringstream is(text);
  std::string line;
  int lineno = 0;
  bool header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      if (line.rfind(kConfigPrefix, 0) == 0 && t.config.empty())
        t.config = line.substr(kConfigPrefix.size());
      continue;
    }
    auto cells = split_line(line);
    if (!header) {
      header = true;
      // a bare number in the first row means a headerless value list
      double dummy;
      auto r = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), dummy);
      if (cells.size() == 1 && r.ec == std::errc() &&
          r.ptr == cells[0].data() + cells[0].size()) {
        t.columns = {"value"};
      } else {
        t.columns = cells;
        continue;
      }
    }
    if (cells.size() != t.columns.size())
      fail(ErrorCode::io, origin + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(t.columns.size()) + " fields, got " +
                              std::to_string(cells.size()));
    t.rows.push_back(std::move(cells));
  }
  if (!header) fail(ErrorCode::io, origin + ": no header line");
  return t;
}

void write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    std::cout.flush();
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path + " for writing");
  f << text;
  if (!f) fail(ErrorCode::io, "write to " + path + " failed");
}

std::string read_text(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(ErrorCode::io, "cannot open " + path);
  std::ostringstream os;
  os << f.rdbuf();
  return os.str();
}

void write_csv(const std::string& path, const CsvTable& t) {
  write_text(path, to_csv(t));
}

CsvTable read_csv(const std::string& path) {
  return parse_csv(read_text(path), path);
}

}  // namespace kpzlab
