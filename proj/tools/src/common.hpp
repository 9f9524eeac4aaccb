#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "magnonfit/device_config.hpp"
#include "magnonfit_cli/cli.hpp"

namespace magnonfit::cli {

/// Bad flags, missing inputs or unreadable files. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fit or simulation ran but did not produce a trustworthy result. Exit code 2.
class NumericalFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Context {
  std::vector<std::string> args;
  std::ostream& out;
  std::ostream& err;
};

void require_readable(const std::filesystem::path& path);
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

/// "<dir>/<stem><suffix>" next to a primary output.
std::filesystem::path sibling(const std::filesystem::path& primary, const std::string& suffix);

/// Device from a config file, or one of the built-in reference devices.
DeviceParams resolve_device(const std::string& device_path, const std::string& reference_id);

/// {version, command, args, input_digests, seed, timestamp} written to <stem>.manifest.json.
void write_manifest(const std::filesystem::path& primary, const Context& ctx, const std::string& command,
                    const std::vector<std::filesystem::path>& inputs, std::optional<std::uint64_t> seed);

/// Lower-case hex SHA-256 of a byte string.
std::string sha256_text(const std::string& bytes);

/// 17 significant digits, shortest form.
std::string num(double v);

}  // namespace magnonfit::cli
