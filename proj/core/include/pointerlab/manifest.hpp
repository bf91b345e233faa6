#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace pointerlab {

std::string tool_version();
std::string sha256_hex(std::string_view bytes);
/// UTC, ISO 8601 with seconds.
std::string utc_timestamp();

struct ManifestFile {
  std::string name;
  std::string sha256;
  std::uintmax_t bytes = 0;
};

struct RunManifest {
  std::string command;
  std::string tool_version;
  std::string config_echo;
  std::vector<std::uint64_t> seeds;
  std::string started;
  std::string finished;
  std::vector<ManifestFile> files;

  std::string to_json() const;
  static RunManifest from_json(std::string_view text);
};

/// Stages the files of one run. Data goes to "<name>.partial" first;
/// commit() checksums the staged bytes, writes manifest.json and only then
/// renames each file to its final name.
class OutputSet {
 public:
  explicit OutputSet(std::filesystem::path directory);

  const std::filesystem::path& directory() const { return dir_; }
  void add(const std::string& name, std::string contents);
  /// Returns the manifest as written.
  RunManifest commit(RunManifest manifest);

 private:
  std::filesystem::path dir_;
  std::vector<std::pair<std::string, std::string>> staged_;
};

}  // namespace pointerlab
