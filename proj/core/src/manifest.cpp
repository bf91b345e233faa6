#include "pointerlab/manifest.hpp"

#include <chrono>
#include <ctime>
#include <fstream>

#include <fmt/format.h>
#include <json.hpp>
#include <openssl/evp.h>

#include "pointerlab/error.hpp"

#ifndef POINTERLAB_VERSION
#define POINTERLAB_VERSION "unknown"
#endif

namespace pointerlab {

namespace fs = std::filesystem;

std::string tool_version() { return POINTERLAB_VERSION; }

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string RunManifest::to_json() const {
  nlohmann::ordered_json j;
  j["command"] = command;
  j["tool_version"] = tool_version;
  j["config"] = config_echo;
  j["seeds"] = seeds;
  j["started"] = started;
  j["finished"] = finished;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    j["files"].push_back({{"name", f.name}, {"sha256", f.sha256}, {"bytes", f.bytes}});
  }
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(std::string_view text) {
  try {
    const auto j = nlohmann::json::parse(text);
    RunManifest m;
    m.command = j.at("command").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    m.config_echo = j.at("config").get<std::string>();
    m.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    m.started = j.at("started").get<std::string>();
    m.finished = j.at("finished").get<std::string>();
    for (const auto& f : j.at("files")) {
      m.files.push_back({f.at("name").get<std::string>(), f.at("sha256").get<std::string>(),
                         f.at("bytes").get<std::uintmax_t>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("malformed manifest: {}", e.what()));
  }
}

OutputSet::OutputSet(fs::path directory) : dir_(std::move(directory)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (ec) {
    throw ValidationError(fmt::format("cannot create output directory '{}': {}", dir_.string(),
                                      ec.message()));
  }
}

void OutputSet::add(const std::string& name, std::string contents) {
  const fs::path staged = dir_ / (name + ".partial");
  std::ofstream out(staged, std::ios::binary | std::ios::trunc);
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(fmt::format("failed writing '{}'", staged.string()));
  staged_.emplace_back(name, std::move(contents));
}

RunManifest OutputSet::commit(RunManifest manifest) {
  manifest.files.clear();
  for (const auto& [name, contents] : staged_) {
    manifest.files.push_back({name, sha256_hex(contents), contents.size()});
  }
  if (manifest.finished.empty()) manifest.finished = utc_timestamp();
  {
    std::ofstream out(dir_ / "manifest.json", std::ios::binary | std::ios::trunc);
    out << manifest.to_json();
    if (!out) throw Error("failed writing manifest.json");
  }
  for (const auto& [name, contents] : staged_) {
    fs::rename(dir_ / (name + ".partial"), dir_ / name);
  }
  staged_.clear();
  return manifest;
}

}  // namespace pointerlab
