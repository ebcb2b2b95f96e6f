#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <vector>

namespace kslab::config {

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

/// Plain `key=value` lines; blank lines and `#` comments are skipped and
/// whitespace around keys and values is trimmed.  A line without `=` or with an
/// empty key throws PreconditionError naming the line.
std::vector<Entry> parse(std::istream& in, const std::string& source = "<config>");
std::vector<Entry> parse_file(const std::filesystem::path& path);

}  // namespace kslab::config
