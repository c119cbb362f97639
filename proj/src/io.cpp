#include "cubepose/io.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include "cubepose/error.hpp"

namespace cubepose {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw Error(ErrorCode::kParse, "config: '" + key + "' expects " + what + ", got '" + value + "'");
}

}  // namespace

std::shared_ptr<std::istream> open_input(const std::string& path, bool binary) {
  if (path == "-") {
    return {&std::cin, [](std::istream*) {}};
  }
  auto f = std::make_shared<std::ifstream>(path, binary ? std::ios::binary : std::ios::in);
  if (!*f) {
    throw Error(ErrorCode::kIo, "cannot open '" + path + "' for reading");
  }
  return f;
}

std::shared_ptr<std::ostream> open_output(const std::string& path, bool binary) {
  if (path == "-") {
    return {&std::cout, [](std::ostream*) {}};
  }
  auto f = std::make_shared<std::ofstream>(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!*f) {
    throw Error(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  }
  return f;
}

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  for (int lineno = 1; std::getline(in, line); ++lineno) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) {
      line.erase(hash);
    }
    line = trim(line);
    if (line.empty()) {
      continue;
    }
    const auto eq = line.find('=');
    const std::string key = eq == std::string::npos ? "" : trim(line.substr(0, eq));
    if (key.empty()) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": expected key = value");
    }
    if (!kv.emplace(key, trim(line.substr(eq + 1))).second) {
      throw Error(ErrorCode::kParse, "config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    }
  }
  return kv;
}

KeyValues read_key_values(const std::string& path) {
  auto in = open_input(path);
  return parse_key_values(*in);
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") {
    return true;
  }
  if (value == "false" || value == "0" || value == "no" || value == "off") {
    return false;
  }
  bad_value(key, value, "a boolean");
}

double parse_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "a number");
  }
  return out;
}

long long parse_int(const std::string& key, const std::string& value) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    bad_value(key, value, "an integer");
  }
  return out;
}

}  // namespace cubepose
