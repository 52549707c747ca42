#pragma once

#include <istream>
#include <map>
#include <ostream>
#include <string>

namespace genomotif::cli {

using KeyValues = std::map<std::string, std::string>;

/// Flat `key = value` lines; '#' starts a comment. Underscores in keys read as dashes.
KeyValues parse_config(std::istream& in, const std::string& source = "config");
KeyValues parse_config_file(const std::string& path);

/// Lowercase hex SHA-256 of a file's bytes.
std::string sha256_file(const std::string& path);

/// Resolves --threads: explicit value, else GENOMOTIF_THREADS, else 1.
int default_threads();

/// Entry point behind the `genomotif` executable. Returns 0 on success, 1 on usage
/// errors and 2 on data errors.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace genomotif::cli
