#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dbflu {

inline constexpr const char* kVersion = "0.1.0";

// FNV-1a 64-bit digest of a file's bytes, hex encoded.
std::string fnv1a_file_digest(const std::string& path);
std::string iso_utc_now();

// Provenance record written once per output directory. Reruns with the same
// command, config and inputs reproduce identical outputs.
struct RunManifest {
  std::string command;
  std::string config_hash;  // "-" when no config file was given
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> input_digests;  // path -> digest
  std::string version = kVersion;
  std::string started;
  std::string finished;

  void write(const std::string& path) const;
};

}  // namespace dbflu
