#include "medex/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <system_error>

#include "medex/errors.hpp"

namespace medex {

void Table::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) {
    throw ArgumentError("row has " + std::to_string(row.size()) + " cells, header has " +
                        std::to_string(columns.size()));
  }
  rows.push_back(std::move(row));
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  if (res.ec != std::errc()) throw Error("could not format a double");
  return std::string(buf, res.ptr);
}

namespace {

void write_cell(const Cell& cell, std::ostream& out) {
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    out << *i;
  } else if (const auto* d = std::get_if<double>(&cell)) {
    if (std::isfinite(*d)) out << format_double(*d);
  }
}

std::optional<double> parse_field(const std::string& field, std::size_t line) {
  if (field.empty()) return std::nullopt;
  double value = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw ArgumentError("non-numeric CSV field '" + field + "' on line " + std::to_string(line));
  }
  return value;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_csv(const Table& table, std::ostream& out) {
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (i) out << ',';
    out << table.columns[i];
  }
  out << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      write_cell(row[i], out);
    }
    out << '\n';
  }
}

void write_csv_file(const Table& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(table, out);
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

std::size_t CsvColumns::index(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ArgumentError("CSV has no column '" + name + "'");
}

CsvColumns read_csv(std::istream& in) {
  CsvColumns out;
  std::string line;
  if (!std::getline(in, line)) throw ArgumentError("CSV input is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  out.columns = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != out.columns.size()) {
      throw ArgumentError("CSV line " + std::to_string(lineno) + " has " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(out.columns.size()));
    }
    std::vector<std::optional<double>> row;
    row.reserve(fields.size());
    for (const auto& f : fields) row.push_back(parse_field(f, lineno));
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvColumns read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  return read_csv(in);
}

}  // namespace medex
