#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace magnonfit::cli {

/// Exit codes: 0 ok, 1 usage or configuration error, 2 numerical failure.
enum ExitCode : int { kOk = 0, kUsage = 1, kNumerical = 2 };

/// Runs one command line (program name excluded). Never throws.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace magnonfit::cli
