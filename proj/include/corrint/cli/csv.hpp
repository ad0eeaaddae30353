#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "corrint/errors.hpp"

namespace corrint::cli {

struct ParseError : Error {
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line(line) {}
  std::size_t line;
};

inline constexpr const char* kParamsPrefix = "# params=";

/// In-memory form of the emitted CSV: a params comment, a header row and
/// string cells (numbers or ERR:<kind> markers).
struct Table {
  std::string params_json;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

inline std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

inline std::string error_marker(const std::string& kind) { return "ERR:" + kind; }

inline bool is_error_marker(const std::string& cell) { return cell.rfind("ERR", 0) == 0; }

/// Numeric value of a cell, or nullopt for an error marker.
inline std::optional<double> cell_value(const std::string& cell) {
  if (is_error_marker(cell)) return std::nullopt;
  if (cell == "nan") return std::nan("");
  if (cell == "inf") return INFINITY;
  if (cell == "-inf") return -INFINITY;
  std::size_t pos = 0;
  double v = std::stod(cell, &pos);
  if (pos != cell.size()) throw std::invalid_argument(cell);
  return v;
}

inline std::string write_csv(const Table& t) {
  std::string out = kParamsPrefix + t.params_json + "\n";
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + row[i];
    out += "\n";
  }
  return out;
}

inline std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  parts.push_back(cur);
  return parts;
}

/// Parses and checks the schema: params line, header, rectangular numeric
/// rows. Line numbers in errors are 1-based.
inline Table parse_csv(const std::string& text) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++lineno;
  if (line.rfind(kParamsPrefix, 0) != 0) throw ParseError(lineno, "expected '# params={...}' header");
  t.params_json = line.substr(std::string(kParamsPrefix).size());
  if (!std::getline(in, line)) throw ParseError(2, "missing column header");
  ++lineno;
  t.columns = split_commas(line);
  for (const auto& c : t.columns) {
    if (c.empty()) throw ParseError(lineno, "empty column name");
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) throw ParseError(lineno, "blank row");
    auto cells = split_commas(line);
    if (cells.size() != t.columns.size()) {
      throw ParseError(lineno, "expected " + std::to_string(t.columns.size()) + " cells, got " +
                                   std::to_string(cells.size()));
    }
    for (const auto& c : cells) {
      try {
        cell_value(c);
      } catch (const std::invalid_argument&) {
        throw ParseError(lineno, "non-numeric cell '" + c + "'");
      } catch (const std::out_of_range&) {
        throw ParseError(lineno, "cell out of range '" + c + "'");
      }
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace corrint::cli
