#pragma once

#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace kslab::csv {

/// Shortest decimal form that reads back to the same double.
std::string format_number(double x);

class Writer {
 public:
  Writer(const std::filesystem::path& path, std::initializer_list<std::string_view> header);
  Writer(const std::filesystem::path& path, const std::vector<std::string>& header);

  void row(std::initializer_list<double> values);
  void row(const std::vector<double>& values);
  /// Mixed rows (e.g. a trailing boolean) go through preformatted cells.
  void raw_row(const std::vector<std::string>& cells);

 private:
  std::ofstream out_;
  std::size_t columns_;
};

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(std::string_view name) const;
};

/// Reads a numeric CSV with a header line.
Table read(const std::filesystem::path& path);

}  // namespace kslab::csv
