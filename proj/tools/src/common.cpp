#include "common.hpp"

#include <array>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

#include "magnonfit/sweep_io.hpp"
#include "magnonfit/version.hpp"
#include "magnonfit_cli/cli.hpp"

namespace magnonfit::cli {

namespace {

class Sha256 {
 public:
  Sha256() : md_(EVP_MD_CTX_new()) {
    if (!md_ || EVP_DigestInit_ex(md_, EVP_sha256(), nullptr) != 1) {
      EVP_MD_CTX_free(md_);
      throw std::runtime_error("sha256: cannot initialise digest");
    }
  }
  ~Sha256() { EVP_MD_CTX_free(md_); }
  Sha256(const Sha256&) = delete;
  Sha256& operator=(const Sha256&) = delete;

  void update(const char* data, std::size_t n) { EVP_DigestUpdate(md_, data, n); }
  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    EVP_DigestFinal_ex(md_, digest.data(), &len);
    std::string out;
    for (unsigned int i = 0; i < len; ++i) out += fmt::format("{:02x}", digest[i]);
    return out;
  }

 private:
  EVP_MD_CTX* md_;
};

}  // namespace

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open " + path.string());
  Sha256 h;
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) h.update(buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  return h.hex();
}

std::string sha256_text(const std::string& bytes) {
  Sha256 h;
  h.update(bytes.data(), bytes.size());
  return h.hex();
}

void require_readable(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open input file " + path.string());
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  require_readable(path);
  std::ifstream in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw UsageError(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw UsageError("cannot open " + path.string() + " for writing");
  out << j.dump(2) << "\n";
}

std::filesystem::path sibling(const std::filesystem::path& primary, const std::string& suffix) {
  return primary.parent_path() / (primary.stem().string() + suffix);
}

DeviceParams resolve_device(const std::string& device_path, const std::string& reference_id) {
  if (!device_path.empty() && !reference_id.empty()) throw UsageError("give either --device or --reference, not both");
  if (!device_path.empty()) return load_device_config(device_path);
  if (!reference_id.empty()) {
    try {
      return reference_device(reference_id);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  throw UsageError("a device is required: pass --device <file> or --reference <id>");
}

void write_manifest(const std::filesystem::path& primary, const Context& ctx, const std::string& command,
                    const std::vector<std::filesystem::path>& inputs, std::optional<std::uint64_t> seed) {
  nlohmann::json digests = nlohmann::json::object();
  for (const auto& p : inputs) digests[p.string()] = sha256_file(p);
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  nlohmann::json m = {{"version", kVersion},
                      {"command", command},
                      {"args", ctx.args},
                      {"input_digests", digests},
                      {"seed", seed ? nlohmann::json(*seed) : nlohmann::json(nullptr)},
                      {"timestamp", ts.str()}};
  write_json_file(sibling(primary, ".manifest.json"), m);
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace magnonfit::cli
