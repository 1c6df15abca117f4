#include "dbflu/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <stdexcept>

namespace dbflu {

std::string fnv1a_file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("fnv1a_file_digest: cannot open " + path);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      hash ^= static_cast<unsigned char>(buf[i]);
      hash *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(hash));
  return hex;
}

std::string iso_utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&tt, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("RunManifest::write: cannot open " + path);
  out << "command = " << command << '\n';
  out << "config_hash = " << (config_hash.empty() ? "-" : config_hash) << '\n';
  out << "seed = " << seed << '\n';
  for (const auto& [file, digest] : input_digests) out << "input " << file << " = " << digest << '\n';
  out << "version = " << version << '\n';
  out << "started = " << started << '\n';
  out << "finished = " << finished << '\n';
}

}  // namespace dbflu
