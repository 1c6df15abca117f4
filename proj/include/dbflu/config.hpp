#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dbflu/mcmc.hpp"
#include "dbflu/model.hpp"

namespace dbflu {

// `key = value` configuration file; '#' starts a comment.
class Config {
 public:
  static Config load(const std::string& path);
  static Config from_string(const std::string& text);

  bool has(const std::string& key) const { return entries_.count(key) > 0; }
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<int> get_int_list(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

 private:
  std::map<std::string, std::string> entries_;
};

// Assembled run settings; every default equals the paper's value.
struct RunConfig {
  DataModelConfig data;
  HyperConfig hyper;
  double baseline = 0.021;
  double probability_floor = 0.0;
  std::string data_file;
  std::string out_dir = "out";
  std::string api_endpoint = "https://api.delphi.cmu.edu/epidata/fluview/";
  std::string cache_dir = "cache";
  std::string mode = "production";  // diagnostic | production | ci
  std::string vintage = "final";    // final | faithful
  std::uint64_t seed = 20160523;
  int workers = 2;
  std::vector<int> backtest_seasons;  // empty: every season in the panel
  int week_from = 3;
  int week_to = 30;
  bool include_pandemic = false;
  bool save_draws = false;

  static RunConfig from_config(const Config& cfg);
  SamplerConfig sampler() const;  // resolved from `mode`, seeded with `seed`
};

}  // namespace dbflu
