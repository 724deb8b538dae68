#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace medex {

/// Empty, integer or real cell.
using Cell = std::variant<std::monostate, std::int64_t, double>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  /// Throws ArgumentError when the row width does not match the header.
  void add_row(std::vector<Cell> row);
};

/// Shortest decimal string that parses back to the same double.
std::string format_double(double value);

/// Header plus one line per row, comma separated, LF terminated. Missing
/// values and non-finite reals are written as empty fields.
void write_csv(const Table& table, std::ostream& out);
/// Throws Error on I/O failure.
void write_csv_file(const Table& table, const std::string& path);

struct CsvColumns {
  std::vector<std::string> columns;
  /// Numeric view of each row; empty fields are nullopt.
  std::vector<std::vector<std::optional<double>>> rows;

  /// Index of `name`; throws ArgumentError when absent.
  std::size_t index(const std::string& name) const;
};

CsvColumns read_csv(std::istream& in);
CsvColumns read_csv_file(const std::string& path);

}  // namespace medex
