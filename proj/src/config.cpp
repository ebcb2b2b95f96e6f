#include "kslab/config.hpp"

#include <fmt/format.h>

#include <fstream>

#include "kslab/error.hpp"

namespace kslab::config {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

std::vector<Entry> parse(std::istream& in, const std::string& source) {
  std::vector<Entry> out;
  int number = 0;
  for (std::string line; std::getline(in, line);) {
    ++number;
    const auto hash = line.find('#');
    const auto body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos)
      throw PreconditionError(fmt::format("{}:{}: expected key=value, got '{}'", source, number, body));
    Entry e{trim(std::string_view(body).substr(0, eq)), trim(std::string_view(body).substr(eq + 1)), number};
    if (e.key.empty()) throw PreconditionError(fmt::format("{}:{}: empty key", source, number));
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<Entry> parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PreconditionError(fmt::format("cannot read config file {}", path.string()));
  return parse(in, path.string());
}

}  // namespace kslab::config
