#pragma once

#include <iosfwd>
#include <map>
#include <memory>
#include <string>

namespace cubepose {

/// Opens a file for reading; "-" means standard input. Throws kIo.
std::shared_ptr<std::istream> open_input(const std::string& path, bool binary = false);
/// Opens a file for writing; "-" means standard output. Throws kIo.
std::shared_ptr<std::ostream> open_output(const std::string& path, bool binary = false);

/// Plain-text `key = value` pairs, one per line; '#' starts a comment.
using KeyValues = std::map<std::string, std::string>;

/// Throws kParse naming the line of a malformed entry or duplicate key.
KeyValues parse_key_values(std::istream& in);
KeyValues read_key_values(const std::string& path);

bool parse_bool(const std::string& key, const std::string& value);
double parse_double(const std::string& key, const std::string& value);
long long parse_int(const std::string& key, const std::string& value);

}  // namespace cubepose
