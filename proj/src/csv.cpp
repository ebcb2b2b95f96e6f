#include "kslab/csv.hpp"

#include <fmt/format.h>

#include <charconv>
#include <limits>
#include <sstream>

#include "kslab/error.hpp"

namespace kslab::csv {

std::string format_number(double x) { return fmt::format("{}", x); }

Writer::Writer(const std::filesystem::path& path, std::initializer_list<std::string_view> header)
    : Writer(path, std::vector<std::string>(header.begin(), header.end())) {}

Writer::Writer(const std::filesystem::path& path, const std::vector<std::string>& header)
    : out_(path), columns_(header.size()) {
  if (!out_) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void Writer::row(std::initializer_list<double> values) {
  row(std::vector<double>(values.begin(), values.end()));
}

void Writer::row(const std::vector<double>& values) {
  if (values.size() != columns_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_number(values[i]);
  out_ << '\n';
}

void Writer::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_) throw std::logic_error("csv row width mismatch");
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << '\n';
}

std::size_t Table::column(std::string_view name) const {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  throw std::out_of_range(fmt::format("csv column '{}' not found", name));
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  while (first < last && *first == ' ') ++first;
  if (std::string_view(first, last - first) == "inf") return std::numeric_limits<double>::infinity();
  if (std::string_view(first, last - first) == "-inf") return -std::numeric_limits<double>::infinity();
  if (std::string_view(first, last - first) == "nan") return std::numeric_limits<double>::quiet_NaN();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw std::runtime_error("bad number in csv: '" + s + "'");
  return v;
}

}  // namespace

Table read(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  Table t;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty csv " + path.string());
  t.header = split(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) throw std::runtime_error("ragged csv " + path.string());
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_double(c));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace kslab::csv
