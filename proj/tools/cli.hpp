#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cpcell::cli {

/// Runs the command line `args` (without the program name). Returns the process
/// exit status: 0 on success, 1 on a compute error or failed criterion, 2 on a
/// usage or configuration error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Hex SHA-256 of a file's contents.
std::string sha256_file(const std::string& path);

}  // namespace cpcell::cli
