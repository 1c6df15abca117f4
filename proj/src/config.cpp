#include "dbflu/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dbflu {

namespace {
std::string strip(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  const auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}
}  // namespace

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("Config::load: cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_string(ss.str());
}

Config Config::from_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    if (!key.empty()) cfg.entries_[key] = value;
  }
  return cfg;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stod(it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stoi(it->second);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::runtime_error("Config: non-boolean value for " + key);
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = entries_.find(key);
  return it == entries_.end() ? fallback : std::stoull(it->second);
}

std::vector<int> Config::get_int_list(const std::string& key) const {
  std::vector<int> out;
  const auto it = entries_.find(key);
  if (it == entries_.end()) return out;
  std::istringstream ss(it->second);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string s = strip(item);
    if (!s.empty()) out.push_back(std::stoi(s));
  }
  return out;
}

RunConfig RunConfig::from_config(const Config& cfg) {
  RunConfig rc;
  rc.data.lambda = cfg.get_double("lambda", rc.data.lambda);
  rc.data.weeks = cfg.get_int("season_weeks", rc.data.weeks);
  rc.baseline = cfg.get_double("baseline", rc.baseline);
  rc.probability_floor = cfg.get_double("probability_floor", rc.probability_floor);
  rc.data_file = cfg.get_string("data_file", rc.data_file);
  rc.out_dir = cfg.get_string("out_dir", rc.out_dir);
  rc.api_endpoint = cfg.get_string("api_endpoint", rc.api_endpoint);
  rc.cache_dir = cfg.get_string("cache_dir", rc.cache_dir);
  rc.mode = cfg.get_string("mode", rc.mode);
  rc.vintage = cfg.get_string("vintage", rc.vintage);
  rc.seed = cfg.get_u64("seed", rc.seed);
  rc.workers = cfg.get_int("workers", rc.workers);
  rc.backtest_seasons = cfg.get_int_list("backtest_seasons");
  rc.week_from = cfg.get_int("week_from", rc.week_from);
  rc.week_to = cfg.get_int("week_to", rc.week_to);
  rc.include_pandemic = cfg.get_bool("include_pandemic", rc.include_pandemic);
  rc.save_draws = cfg.get_bool("save_draws", rc.save_draws);

  rc.hyper.tau_mu_T_shape = cfg.get_double("tau_mu_T_shape", rc.hyper.tau_mu_T_shape);
  rc.hyper.tau_mu_T_rate = cfg.get_double("tau_mu_T_rate", rc.hyper.tau_mu_T_rate);
  rc.hyper.tau_mu_shape = cfg.get_double("tau_mu_shape", rc.hyper.tau_mu_shape);
  rc.hyper.tau_mu_rate = cfg.get_double("tau_mu_rate", rc.hyper.tau_mu_rate);
  rc.hyper.a_delta_shape = cfg.get_double("a_delta_shape", rc.hyper.a_delta_shape);
  rc.hyper.a_delta_rate = cfg.get_double("a_delta_rate", rc.hyper.a_delta_rate);
  rc.hyper.b_delta_shape = cfg.get_double("b_delta_shape", rc.hyper.b_delta_shape);
  rc.hyper.b_delta_rate = cfg.get_double("b_delta_rate", rc.hyper.b_delta_rate);
  rc.hyper.sigma_alpha_shape = cfg.get_double("sigma_alpha_shape", rc.hyper.sigma_alpha_shape);
  rc.hyper.sigma_alpha_rate = cfg.get_double("sigma_alpha_rate", rc.hyper.sigma_alpha_rate);
  rc.hyper.alpha_center = cfg.get_double("alpha_center", rc.hyper.alpha_center);
  return rc;
}

SamplerConfig RunConfig::sampler() const {
  SamplerConfig sc;
  if (mode == "diagnostic") {
    sc = SamplerConfig::diagnostic();
  } else if (mode == "production") {
    sc = SamplerConfig::production();
  } else if (mode == "ci") {
    sc = SamplerConfig::ci();
  } else {
    throw std::runtime_error("RunConfig: unknown mode '" + mode + "'");
  }
  sc.seed = seed;
  return sc;
}

}  // namespace dbflu
